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
#include <vector>

#include "cfrsma/channel.hpp"
#include "cfrsma/config.hpp"
#include "cfrsma/rng.hpp"
#include "cfrsma/topology.hpp"

namespace cfrsma {

/// Drop-level second-order statistics of the UL LMMSE estimator.
struct UlStatistics {
  int tau_u = 0;
  int antennas = 0;
  std::vector<arma::cx_mat> psi;      // per (m, slot): inverse of the pilot observation covariance
  std::vector<arma::cx_mat> psi_inv;  // observation covariance itself
  std::vector<arma::cx_mat> gain;     // per pair: maps y_m[slot(k)] to the estimate
  std::vector<arma::cx_mat> r_hat;    // per pair: estimate covariance
  std::vector<double> r_hat_trace;

  std::size_t slot_index(int m, int slot) const { return static_cast<std::size_t>(m) * tau_u + (slot - 1); }
  const arma::cx_mat& psi_of(int m, int slot) const { return psi[slot_index(m, slot)]; }
  const arma::cx_mat& psi_inv_of(int m, int slot) const { return psi_inv[slot_index(m, slot)]; }
};

UlStatistics ul_statistics(const Topology& topology, const AgingProfile& aging, const SimConfig& config);

struct UlLmmse {
  arma::cx_vec h_hat;
  arma::cx_mat r_hat;
};

/// Standalone LMMSE estimate of h_mk[lambda] from the pilot observation of its slot.
UlLmmse ul_lmmse(const arma::cx_vec& y, const Topology& topology, int m, int k, double rho_pilot, double pilot_w,
                 double noise_w);

/// Pilot observation at AP m in `slot` (unit pilot symbols).
arma::cx_vec receive_ul_pilot(ChannelBlock& block, int m, int slot, double pilot_w, double noise_w, Engine& eng,
                              ComplexGaussian& gauss);

/// One realization of UL training.
struct UlEstimate {
  int antennas = 0;
  std::vector<arma::cx_vec> obs;  // per (m, slot), same indexing as UlStatistics
  std::vector<cx> h_hat;          // pair-major, N entries per pair

  std::span<const cx> estimate(int pair) const {
    return {h_hat.data() + static_cast<std::size_t>(pair) * antennas, static_cast<std::size_t>(antennas)};
  }
};

/// Receives every pilot slot at every AP and forms the estimates of all pairs.
/// Noise comes from the UL noise stream keyed by (drop, realization).
UlEstimate estimate_ul(ChannelBlock& block, const UlStatistics& stats, const SimConfig& config, std::uint64_t drop);

}  // namespace cfrsma
