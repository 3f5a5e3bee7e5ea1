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

#include "cfrsma/ul_estimation.hpp"

#include <string>

#include "cfrsma/linalg.hpp"

namespace cfrsma {

namespace {

arma::cx_mat invert_covariance(const arma::cx_mat& cov, int m, int slot) {
  arma::cx_mat inv;
  const arma::cx_mat sym = 0.5 * (cov + cov.t());
  if (!arma::inv_sympd(inv, sym)) {
    throw NumericError("pilot observation covariance is singular at AP " + std::to_string(m) + ", slot " +
                       std::to_string(slot));
  }
  return 0.5 * (inv + inv.t());
}

}  // namespace

UlStatistics ul_statistics(const Topology& topology, const AgingProfile& aging, const SimConfig& config) {
  const int n = topology.antennas;
  const double pilot_w = config.ul_pilot_w();
  const double noise_w = config.noise_w();
  UlStatistics s;
  s.tau_u = topology.tau_u;
  s.antennas = n;
  s.psi.resize(static_cast<std::size_t>(topology.num_aps) * topology.tau_u);
  s.psi_inv.resize(s.psi.size());
  for (int m = 0; m < topology.num_aps; ++m) {
    for (int slot = 1; slot <= topology.tau_u; ++slot) {
      arma::cx_mat cov = noise_w * arma::eye<arma::cx_mat>(n, n);
      for (int i : topology.ues_in_slot[slot - 1]) cov += pilot_w * topology.r_bar[topology.pair(m, i)];
      s.psi_inv[s.slot_index(m, slot)] = cov;
      s.psi[s.slot_index(m, slot)] = invert_covariance(cov, m, slot);
    }
  }
  const std::size_t pairs = static_cast<std::size_t>(topology.num_aps) * topology.num_ues;
  s.gain.resize(pairs);
  s.r_hat.resize(pairs);
  s.r_hat_trace.resize(pairs);
  for (int m = 0; m < topology.num_aps; ++m) {
    for (int k = 0; k < topology.num_ues; ++k) {
      const int p = topology.pair(m, k);
      const int slot = topology.pilot_index[k];
      const double rho = aging.rho(k, slot);
      const arma::cx_mat& psi = s.psi_of(m, slot);
      s.gain[p] = (rho * std::sqrt(pilot_w)) * topology.r_bar[p] * psi;
      arma::cx_mat r_hat = (pilot_w * rho * rho) * topology.r_bar[p] * psi * topology.r_bar[p];
      s.r_hat[p] = 0.5 * (r_hat + r_hat.t());
      s.r_hat_trace[p] = real_trace(s.r_hat[p]);
    }
  }
  return s;
}

UlLmmse ul_lmmse(const arma::cx_vec& y, const Topology& topology, int m, int k, double rho_pilot, double pilot_w,
                 double noise_w) {
  const int n = topology.antennas;
  const int slot = topology.pilot_index[k];
  arma::cx_mat cov = noise_w * arma::eye<arma::cx_mat>(n, n);
  for (int i : topology.ues_in_slot[slot - 1]) cov += pilot_w * topology.r_bar[topology.pair(m, i)];
  const arma::cx_mat psi = invert_covariance(cov, m, slot);
  const arma::cx_mat& r_bar = topology.r_bar[topology.pair(m, k)];
  UlLmmse out;
  out.h_hat = (rho_pilot * std::sqrt(pilot_w)) * (r_bar * (psi * y));
  out.r_hat = (pilot_w * rho_pilot * rho_pilot) * r_bar * psi * r_bar;
  out.r_hat = 0.5 * (out.r_hat + out.r_hat.t());
  return out;
}

arma::cx_vec receive_ul_pilot(ChannelBlock& block, int m, int slot, double pilot_w, double noise_w, Engine& eng,
                              ComplexGaussian& gauss) {
  const Topology& topology = block.topology();
  const int n = topology.antennas;
  const double amp = std::sqrt(pilot_w);
  const double noise_amp = std::sqrt(noise_w);
  arma::cx_vec y(n);
  for (int i = 0; i < n; ++i) y[i] = noise_amp * gauss(eng);
  for (int i : topology.ues_in_slot[slot - 1]) y += amp * block.channel_at(m, i, slot);
  return y;
}

UlEstimate estimate_ul(ChannelBlock& block, const UlStatistics& stats, const SimConfig& config, std::uint64_t drop) {
  const Topology& topology = block.topology();
  const int n = topology.antennas;
  const double pilot_w = config.ul_pilot_w();
  const double noise_w = config.noise_w();
  Engine eng = make_engine(config.seed, {drop, tag(Stream::kUlNoise), block.realization()});
  ComplexGaussian gauss;

  UlEstimate est;
  est.antennas = n;
  est.obs.resize(stats.psi.size());
  for (int m = 0; m < topology.num_aps; ++m) {
    for (int slot = 1; slot <= topology.tau_u; ++slot) {
      est.obs[stats.slot_index(m, slot)] = receive_ul_pilot(block, m, slot, pilot_w, noise_w, eng, gauss);
    }
  }
  est.h_hat.assign(static_cast<std::size_t>(topology.num_aps) * topology.num_ues * n, cx{});
  for (int m = 0; m < topology.num_aps; ++m) {
    for (int k = 0; k < topology.num_ues; ++k) {
      const int p = topology.pair(m, k);
      const arma::cx_vec& y = est.obs[stats.slot_index(m, topology.pilot_index[k])];
      const arma::cx_mat& g = stats.gain[p];
      cx* out = est.h_hat.data() + static_cast<std::size_t>(p) * n;
      for (int c = 0; c < n; ++c) {
        const cx yc = y[c];
        for (int r = 0; r < n; ++r) out[r] += g(r, c) * yc;
      }
    }
  }
  return est;
}

}  // namespace cfrsma
