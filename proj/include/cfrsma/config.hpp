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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfrsma/types.hpp"

namespace cfrsma {

enum class Mode {
  kRsmaDlPilots,    // RSMA, UEs estimate effective DL channels from precoded pilots
  kRsmaNoDlPilots,  // RSMA, UEs decode with statistical CSI only
  kSdma,            // private streams only
};

std::string to_string(Mode mode);
Mode mode_from_string(std::string_view text);

/// beta_dB = intercept_db - slope_db * log10(d)
struct PathLossModel {
  double intercept_db = -30.5;
  double slope_db = 36.7;
};

/// K = 10^(intercept - slope * d)
struct RicianModel {
  double intercept = 1.3;
  double slope = 0.003;
};

struct SimConfig {
  double area_side_m = 1000.0;
  double ap_height_m = 10.0;

  int num_aps = 16;          // M
  int antennas_per_ap = 4;   // N
  int num_ues = 16;          // K
  int num_clusters = 4;      // L

  double bandwidth_hz = 20e6;

  int tau_c = 100;
  // Unset values are resolved by resolve_timing().
  std::optional<int> tau_u;
  std::optional<int> tau_dc;
  std::optional<int> tau_dp;

  double p_max_dbm = 30.0;
  double ul_pilot_dbm = 30.0;
  double noise_dbm = -94.0;
  double power_split = 0.05;  // t_m
  double asd_deg = 30.0;

  // One value for all UEs, or one value per UE.
  std::vector<double> velocity_kmh{40.0};
  double carrier_hz = 2e9;
  double sample_time_s = 66.7e-6;

  PathLossModel path_loss;
  RicianModel rician;

  int drops = 50;
  int realizations = 100;
  std::uint64_t seed = 1;

  Mode mode = Mode::kRsmaDlPilots;

  double velocity_of(int ue) const;
  double p_max_w() const { return dbm_to_watt(p_max_dbm); }
  double ul_pilot_w() const { return dbm_to_watt(ul_pilot_dbm); }
  double noise_w() const { return dbm_to_watt(noise_dbm); }
  /// t_m actually applied: SDMA always uses 1.
  double effective_power_split() const;
  bool has_common_stream() const { return effective_power_split() < 1.0; }
};

/// Resource-block layout. Instants are 1-based: t in {1, ..., tau_c}.
struct Timing {
  int tau_c = 0;
  int tau_u = 0;
  int tau_dc = 0;
  int tau_dp = 0;

  int tau_d() const { return tau_dc + tau_dp; }
  /// Anchor / estimation instant, the first data instant.
  int lambda() const { return tau_u + tau_d() + 1; }
  int ul_instant(int slot) const { return slot; }
  int dl_common_instant(int cluster) const { return tau_u + cluster + 1; }
  int dl_private_instant(int slot) const { return tau_u + tau_dc + slot; }
  int num_data_instants() const { return tau_c - lambda() + 1; }
};

/// Smallest pilot budget that keeps pilots orthogonal inside balanced clusters.
int max_cluster_size(int num_ues, int num_clusters);

/// Checks every scalar invariant; throws ConfigError naming the violated bound.
void validate(const SimConfig& config);

/// Applies mode rules (tau_dc = L only when a common stream is trained, no DL
/// training without DL pilots) and checks tau_u + tau_d < tau_c.
Timing resolve_timing(const SimConfig& config);

// Flat "key = value" text. The first meaningful line must be "schema_version = 1".
inline constexpr int kConfigSchemaVersion = 1;

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text);
/// Applies recognised keys onto `config`; unknown keys raise ConfigError.
void apply_key_values(SimConfig& config, const KeyValues& values);
SimConfig parse_config(std::string_view text);
SimConfig load_config_file(const std::string& path);
/// Canonical serialization (sorted keys, round-trippable doubles).
std::string to_key_value_text(const SimConfig& config);
/// FNV-1a over the canonical text.
std::uint64_t config_hash(const SimConfig& config);

}  // namespace cfrsma
