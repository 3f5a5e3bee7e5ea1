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
#include <span>
#include <vector>

#include "cfrsma/config.hpp"
#include "cfrsma/topology.hpp"
#include "cfrsma/ul_estimation.hpp"

namespace cfrsma {

struct PowerSplit {
  double common = 0.0;
  double private_stream = 0.0;
};

/// Common stream takes (1 - t) p_max, each private stream t p_max / cluster size.
PowerSplit power_split(double split, double p_max_w, int cluster_ue_count);

/// Drop-level normalization and power allocation. APs belong to exactly one
/// cluster, so common quantities are indexed by AP.
struct PrecoderPlan {
  std::vector<double> eta_common;   // per AP
  std::vector<double> eta_private;  // per pair, 0 when the AP does not serve the UE
  std::vector<double> p_common;     // per AP
  std::vector<double> p_private;    // per AP, power of each private stream
};

PrecoderPlan plan_precoders(const Topology& topology, const UlStatistics& stats, const SimConfig& config);

/// Normalized MR precoders of one realization (unit average norm, power not applied).
struct PrecoderSet {
  int antennas = 0;
  std::vector<cx> common;   // per AP
  std::vector<cx> priv;     // per pair, zero when not served
  const PrecoderPlan* plan = nullptr;

  std::span<const cx> common_of(int m) const {
    return {common.data() + static_cast<std::size_t>(m) * antennas, static_cast<std::size_t>(antennas)};
  }
  std::span<const cx> private_of(int pair) const {
    return {priv.data() + static_cast<std::size_t>(pair) * antennas, static_cast<std::size_t>(antennas)};
  }
};

arma::cx_vec build_private_precoder(const Topology& topology, const UlEstimate& est, const PrecoderPlan& plan, int m,
                                    int k);
arma::cx_vec build_common_precoder(const Topology& topology, const UlEstimate& est, const PrecoderPlan& plan, int l,
                                   int m);

PrecoderSet build_precoders(const Topology& topology, const UlEstimate& est, const PrecoderPlan& plan);

}  // namespace cfrsma
