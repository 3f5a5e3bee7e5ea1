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

#include <functional>
#include <string>
#include <vector>

#include "cfrsma/config.hpp"
#include "cfrsma/link_sim.hpp"

namespace cfrsma {

/// A grid of simulation points: every combination of the listed axis values
/// and modes. An empty axis keeps the base configuration's value.
struct SweepSpec {
  std::string preset = "custom";
  SimConfig base;
  std::vector<int> ues;
  std::vector<int> clusters;
  std::vector<double> velocities;
  std::vector<int> block_lengths;
  std::vector<Mode> modes;
};

/// fig_a, fig_b, fig_c or custom (the base configuration alone).
SweepSpec preset_sweep(const std::string& name);

/// Applies a key-value file on top of a sweep. Keys `preset`, `modes` and
/// `sweep.K`, `sweep.L`, `sweep.velocity_kmh`, `sweep.tau_c` shape the grid;
/// all other keys go to the base configuration.
void apply_sweep_keys(SweepSpec& spec, const KeyValues& values);

/// Axis values strictly increasing, modes non-empty, every point a valid configuration.
void validate(const SweepSpec& spec);

struct SweepPoint {
  Mode mode = Mode::kRsmaDlPilots;
  int ues = 0;
  int clusters = 0;
  double velocity_kmh = 0.0;
  int tau_c = 0;
  SeReport report;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the grid; points come back sorted by (mode, K, L, velocity, tau_c).
std::vector<SweepPoint> run_sweep(const SweepSpec& spec, const SimOptions& options, const ProgressFn& progress = {});

inline constexpr const char* kCsvHeader =
    "mode,K,L,velocity_kmh,tau_c,se_sum,se_sum_stderr,se_common,se_common_stderr,se_private,se_private_stderr,"
    "drops,realizations";

/// Deterministic CSV (shortest round-trip number formatting).
std::string results_csv(const std::vector<SweepPoint>& points);

struct RunInfo {
  std::string version;
  int threads = 1;
  double wall_time_s = 0.0;
  SimOptions options;
};

std::string run_manifest_json(const SweepSpec& spec, const std::vector<SweepPoint>& points, const RunInfo& info);

/// One SVG line plot of sum SE. The x axis is the longest swept axis; every
/// other combination of axis values and mode becomes a series.
std::string sweep_plot_svg(const SweepSpec& spec, const std::vector<SweepPoint>& points);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

}  // namespace cfrsma
