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

#include <armadillo>
#include <cstdint>
#include <string>
#include <vector>

#include "cfrsma/channel.hpp"
#include "cfrsma/config.hpp"
#include "cfrsma/precoding.hpp"
#include "cfrsma/topology.hpp"
#include "cfrsma/ul_estimation.hpp"

namespace cfrsma {

/// Moments of one effective DL channel and of the pilot observation used to estimate it.
struct ScalarStats {
  cx mean{};        // prior mean of the channel at the anchor instant
  cx pilot_mean{};  // mean of the pilot observation
  cx theta{};       // E[(y - pilot_mean) conj(a - mean)]
  double psi = 0.0;      // pilot observation variance
  double r = 0.0;        // channel variance
  double r_hat = 0.0;    // variance of the estimate
  double r_tilde = 0.0;  // error variance
  double rho = 1.0;      // temporal correlation between pilot instant and anchor
};

struct DlStatistics {
  int num_ues = 0;
  int num_clusters = 0;
  bool has_common = false;
  std::vector<ScalarStats> common;               // l * K + k
  std::vector<ScalarStats> priv;                 // per UE, own private channel
  std::vector<std::vector<cx>> private_means;    // per UE k, aligned with topology.pilot_sets[k]
  std::vector<std::vector<double>> private_var;  // same alignment

  const ScalarStats& common_of(int l, int k) const { return common[static_cast<std::size_t>(l) * num_ues + k]; }
};

/// Moments of h_mk^H (gain of UE i) y_m[slot(i)] at the anchor instant.
struct LinkMoments {
  cx mean{};
  double variance = 0.0;
  double innovation = 0.0;  // E|f^H estimate_mi|^2 for an independent innovation f of UE k
};

LinkMoments link_moments(const Topology& topology, const UlStatistics& ul, const AgingProfile& aging, double pilot_w,
                         int m, int i, int k);

/// Second-order statistics in closed form. Throws StatisticsError when a pilot
/// observation variance is not positive.
DlStatistics dl_stats_closed_form(const Topology& topology, const UlStatistics& ul, const PrecoderPlan& plan,
                                  const AgingProfile& aging, const Timing& timing, const SimConfig& config);

/// Same statistics estimated from `samples` independent realizations.
DlStatistics dl_stats_monte_carlo(const Topology& topology, const UlStatistics& ul, const PrecoderPlan& plan,
                                  const AgingProfile& aging, const Timing& timing, const SimConfig& config,
                                  int samples, std::uint64_t seed);

/// Largest relative deviation between two statistic sets. Deviations of scalars
/// below 1% of the dominant magnitude of their group are measured against 5%
/// instead of `tolerance`; the returned string names the worst offender.
struct StatsComparison {
  double worst_ratio = 0.0;  // deviation / allowed deviation, > 1 means mismatch
  std::string worst_name;
};
StatsComparison compare_statistics(const DlStatistics& reference, const DlStatistics& candidate, double tolerance);

/// R_bar_mi R_bar_mk^{-1}; StatisticsError when R_bar_mk is singular.
arma::cx_mat lambda_matrix(const Topology& topology, int m, int i, int k);

/// Sum over the APs of cluster l of sqrt(p_c) h_mk[t]^H v_c.
cx effective_common(ChannelBlock& block, const PrecoderSet& precoders, int l, int k, int t);
/// Sum over the serving APs of UE i of sqrt(p_p) h_mk[t]^H v_p(i).
cx effective_private(ChannelBlock& block, const PrecoderSet& precoders, int k, int i, int t);

/// Common pilot of cluster l as seen by UE k.
cx receive_dl_common_pilot(ChannelBlock& block, const PrecoderSet& precoders, const Timing& timing, int l, int k,
                           cx noise);
/// Private pilot slot of UE k, contaminated by same-slot UEs of other clusters.
cx receive_dl_private_pilot(ChannelBlock& block, const PrecoderSet& precoders, const Timing& timing, int k, cx noise);

/// Scalar LMMSE: mean + conj(theta) / psi (y - pilot_mean).
cx scalar_lmmse(cx y, const ScalarStats& stats);
inline cx dl_common_lmmse(cx y, const ScalarStats& stats) { return scalar_lmmse(y, stats); }
inline cx dl_private_lmmse(cx y, const ScalarStats& stats) { return scalar_lmmse(y, stats); }

/// Effective-channel knowledge of the UEs in one realization.
struct DlEstimate {
  std::vector<cx> common;      // l * K + k
  std::vector<cx> priv;        // own private channel per UE
  std::vector<cx> obs_common;  // pilot observations (empty without DL pilots)
  std::vector<cx> obs_private;
};

/// Runs DL training (or falls back to prior means without DL pilots).
DlEstimate estimate_dl(ChannelBlock& block, const PrecoderSet& precoders, const DlStatistics& stats,
                       const Timing& timing, const SimConfig& config, std::uint64_t drop);

}  // namespace cfrsma
