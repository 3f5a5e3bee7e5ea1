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
#include <span>
#include <vector>

#include "cfrsma/config.hpp"
#include "cfrsma/rng.hpp"
#include "cfrsma/topology.hpp"

namespace cfrsma {

/// f_d = v f_c / c, v given in km/h.
double doppler_hz(double velocity_kmh, double carrier_hz);

/// Jakes correlation between instants t and lambda: J0(2 pi f_d T_s |t - lambda|).
double temporal_corr(int t, int lambda, double velocity_kmh, double carrier_hz, double sample_time_s);

/// Per-UE temporal coefficients rho_k(t) and sqrt(1 - rho_k(t)^2) over one block.
class AgingProfile {
 public:
  AgingProfile() = default;
  AgingProfile(const SimConfig& config, const Timing& timing);

  double rho(int ue, int t) const { return rho_[index(ue, t)]; }
  double rho_bar(int ue, int t) const { return rho_bar_[index(ue, t)]; }
  int lambda() const { return lambda_; }
  int tau_c() const { return tau_c_; }
  int num_ues() const { return num_ues_; }

 private:
  std::size_t index(int ue, int t) const { return static_cast<std::size_t>(ue) * (tau_c_ + 1) + t; }

  int num_ues_ = 0;
  int tau_c_ = 0;
  int lambda_ = 0;
  std::vector<double> rho_;
  std::vector<double> rho_bar_;
};

/// h = h_bar e^{j phi} + R^{1/2} g, phi ~ U[-pi, pi), g ~ CN(0, I). Returns phi.
double draw_channel(const arma::cx_vec& h_bar, const arma::cx_mat& r_sqrt, Engine& eng, ComplexGaussian& gauss,
                    cx* out);

struct AnchorSample {
  std::vector<cx> h;           // pair-major, N entries per (m, k)
  std::vector<double> phases;  // LoS phase per pair
};

/// Draws h_mk[lambda] for every AP-UE pair.
AnchorSample sample_anchor(const Topology& topology, Engine& eng);

/// Channels of one realization over a resource block:
///   h_mk[t] = rho_k(t) h_mk[lambda] + rho_bar_k(t) f_mk[t]
/// Innovations are independent per instant and distributed like the anchor.
/// They are generated lazily per (t, k) from a counter-keyed stream and memoized,
/// so every read within a realization sees the same values.
class ChannelBlock {
 public:
  ChannelBlock(const Topology& topology, const AgingProfile& aging, std::uint64_t seed, std::uint64_t drop);

  /// Draws a fresh anchor and forgets all innovations.
  void start_realization(std::uint64_t realization);

  std::span<const cx> anchor(int m, int k) const {
    return {anchor_.h.data() + static_cast<std::size_t>(topology_->pair(m, k)) * n_, static_cast<std::size_t>(n_)};
  }
  double anchor_phase(int m, int k) const { return anchor_.phases[topology_->pair(m, k)]; }

  /// f_mk[t], 1 <= t <= tau_c. Throws std::out_of_range otherwise.
  std::span<const cx> innovation(int m, int k, int t);

  /// h_mk[t], 1 <= t <= tau_c. Throws std::out_of_range otherwise.
  arma::cx_vec channel_at(int m, int k, int t);

  const Topology& topology() const { return *topology_; }
  const AgingProfile& aging() const { return *aging_; }
  std::uint64_t realization() const { return realization_; }
  int antennas() const { return n_; }

 private:
  void check_instant(int t) const;
  void generate_innovations(int t, int k);

  const Topology* topology_;
  const AgingProfile* aging_;
  std::uint64_t seed_;
  std::uint64_t drop_;
  std::uint64_t realization_ = 0;
  int n_;
  AnchorSample anchor_;
  std::vector<cx> innovations_;  // ((t * K + k) * M + m) * N
  std::vector<char> generated_;  // t * K + k
  ComplexGaussian gauss_;
};

}  // namespace cfrsma
