// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cfrsma/channel.hpp"
#include "cfrsma/config.hpp"
#include "cfrsma/dl_estimation.hpp"
#include "cfrsma/precoding.hpp"
#include "cfrsma/topology.hpp"
#include "cfrsma/ul_estimation.hpp"

namespace cfrsma {

/// Desired term and the five disturbance terms of one decoding step.
/// Common step: estimation error, aging, residual inter-cluster common
/// interference, private signals of all UEs, noise.
/// Private step: estimation error, aging, private interference, residual
/// inter-cluster common interference, noise.
struct SinrTerms {
  cx desired{};
  std::array<cx, 5> disturbance{};
};

/// |desired|^2 / sum |disturbance|^2.
double sinr(const SinrTerms& terms);

enum class StatsSource { kClosedForm, kMonteCarlo };
std::string to_string(StatsSource source);
StatsSource stats_source_from_string(const std::string& text);

struct SimOptions {
  int threads = 1;
  StatsSource stats_source = StatsSource::kClosedForm;
  int stats_samples = 100000;  // realizations per drop for the Monte Carlo route
  int verify_samples = 0;      // > 0: cross-check closed forms against this many samples per drop
  double verify_tolerance = 0.02;
};

/// Everything that is fixed within one drop.
struct DropModel {
  SimConfig config;
  std::uint64_t drop = 0;
  Timing timing;
  Topology topology;
  AgingProfile aging;
  UlStatistics ul;
  PrecoderPlan plan;
  DlStatistics dl;
  double stats_deviation = 0.0;  // worst verification ratio, 0 when not verified
};

/// Builds the drop; with verify_samples > 0 throws StatisticsError naming the
/// first statistic whose closed form disagrees with the sampled value.
DropModel prepare_drop(const SimConfig& config, std::uint64_t drop, const SimOptions& options = {});

/// Per-realization state shared by all data instants.
struct RealizationState {
  UlEstimate ul;
  PrecoderSet precoders;
  DlEstimate dl;
  std::vector<cx> common_anchor;   // a_c at the anchor instant, l * K + k
  std::vector<cx> private_anchor;  // own private channel at the anchor instant
};

RealizationState start_realization(ChannelBlock& block, const DropModel& model, std::uint64_t realization);

struct InstantDraw {
  std::vector<cx> common_symbols;   // per cluster
  std::vector<cx> private_symbols;  // per UE
  std::vector<cx> noise;            // per UE
};

InstantDraw draw_instant(const DropModel& model, std::uint64_t realization, int t);

struct InstantResult {
  std::vector<SinrTerms> common;  // per UE, empty without a common stream
  std::vector<SinrTerms> priv;    // per UE
  InstantDraw draw;
};

/// Decomposes the received data signal of every UE at data instant t.
InstantResult simulate_instant(ChannelBlock& block, const DropModel& model, const RealizationState& state, int t);

/// Realization-averaged SE of one drop, per data instant.
struct DropSeries {
  int lambda = 0;
  int last_instant = 0;
  int num_clusters = 0;
  int num_ues = 0;
  std::vector<double> common_min;   // (t - lambda) * L + l
  std::vector<double> common_ue;    // (t - lambda) * K + k
  std::vector<double> private_ue;   // (t - lambda) * K + k
  double stats_deviation = 0.0;
};

DropSeries simulate_drop(const DropModel& model, int realizations);

/// Time-averaged SE of one drop over a block of length tau_c <= last instant.
struct DropSe {
  double sum = 0.0;
  double common = 0.0;
  double priv = 0.0;
  std::vector<double> common_cluster;
  std::vector<double> private_ue;
};

DropSe aggregate_drop(const DropSeries& series, int tau_c);

struct SeStat {
  double mean = 0.0;
  double std_error = 0.0;
};

SeStat mean_and_stderr(const std::vector<double>& values);

struct SeReport {
  std::vector<double> per_drop_sum;
  std::vector<double> per_drop_common;
  std::vector<double> per_drop_private;
  SeStat sum, common, priv;
  std::vector<SeStat> common_cluster;
  std::vector<SeStat> private_ue;

  Mode mode = Mode::kRsmaDlPilots;
  int drops = 0;
  int realizations = 0;
  int tau_c = 0;
  int lambda = 0;
  std::uint64_t config_hash = 0;
  StatsSource stats_source = StatsSource::kClosedForm;
  double stats_deviation = 0.0;
};

SeReport ergodic_se(const SimConfig& config, const SimOptions& options = {});

/// One report per block length. Every block length shares the simulation of the
/// longest one, which gives the same result as separate runs.
std::vector<SeReport> ergodic_se_block_lengths(const SimConfig& config, const std::vector<int>& tau_c_values,
                                               const SimOptions& options = {});

/// Mean and standard error of the per-drop difference a - b (same drops).
SeStat paired_difference(const SeReport& a, const SeReport& b);

}  // namespace cfrsma
