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

#include "cfrsma/channel.hpp"

#include <string>
#include <vector>

#include "cfrsma/bessel.hpp"

namespace cfrsma {

double doppler_hz(double velocity_kmh, double carrier_hz) {
  return (velocity_kmh / 3.6) * carrier_hz / kSpeedOfLight;
}

double temporal_corr(int t, int lambda, double velocity_kmh, double carrier_hz, double sample_time_s) {
  const double lag = std::abs(t - lambda);
  return bessel_j0(2.0 * kPi * doppler_hz(velocity_kmh, carrier_hz) * sample_time_s * lag);
}

AgingProfile::AgingProfile(const SimConfig& config, const Timing& timing)
    : num_ues_(config.num_ues), tau_c_(timing.tau_c), lambda_(timing.lambda()) {
  rho_.assign(static_cast<std::size_t>(num_ues_) * (tau_c_ + 1), 0.0);
  rho_bar_.assign(rho_.size(), 0.0);
  for (int k = 0; k < num_ues_; ++k) {
    for (int t = 1; t <= tau_c_; ++t) {
      const double r = temporal_corr(t, lambda_, config.velocity_of(k), config.carrier_hz, config.sample_time_s);
      rho_[index(k, t)] = r;
      rho_bar_[index(k, t)] = std::sqrt(std::max(0.0, 1.0 - r * r));
    }
  }
}

double draw_channel(const arma::cx_vec& h_bar, const arma::cx_mat& r_sqrt, Engine& eng, ComplexGaussian& gauss,
                    cx* out) {
  const int n = static_cast<int>(h_bar.n_elem);
  const double phi = gauss.phase(eng);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  std::vector<cx> heap;
  cx stack[16];
  cx* g = stack;
  if (n > 16) {
    heap.resize(n);
    g = heap.data();
  }
  for (int i = 0; i < n; ++i) g[i] = gauss(eng);
  const cx* mean = h_bar.memptr();
  for (int i = 0; i < n; ++i) {
    out[i] = {mean[i].real() * c - mean[i].imag() * s, mean[i].real() * s + mean[i].imag() * c};
  }
  const cx* col = r_sqrt.memptr();  // column-major
  for (int j = 0; j < n; ++j, col += n) {
    const double gr = g[j].real();
    const double gi = g[j].imag();
    for (int i = 0; i < n; ++i) {
      const double ar = col[i].real();
      const double ai = col[i].imag();
      out[i] = {out[i].real() + ar * gr - ai * gi, out[i].imag() + ar * gi + ai * gr};
    }
  }
  return phi;
}

AnchorSample sample_anchor(const Topology& topology, Engine& eng) {
  const int n = topology.antennas;
  const std::size_t pairs = static_cast<std::size_t>(topology.num_aps) * topology.num_ues;
  AnchorSample out;
  out.h.resize(pairs * n);
  out.phases.resize(pairs);
  ComplexGaussian gauss;
  for (std::size_t p = 0; p < pairs; ++p) {
    out.phases[p] = draw_channel(topology.h_bar[p], topology.r_sqrt[p], eng, gauss, out.h.data() + p * n);
  }
  return out;
}

ChannelBlock::ChannelBlock(const Topology& topology, const AgingProfile& aging, std::uint64_t seed,
                           std::uint64_t drop)
    : topology_(&topology), aging_(&aging), seed_(seed), drop_(drop), n_(topology.antennas) {
  const std::size_t slots = static_cast<std::size_t>(aging.tau_c() + 1) * topology.num_ues;
  innovations_.resize(slots * topology.num_aps * n_);
  generated_.assign(slots, 0);
}

void ChannelBlock::start_realization(std::uint64_t realization) {
  realization_ = realization;
  Engine eng = make_engine(seed_, {drop_, tag(Stream::kAnchor), realization});
  anchor_ = sample_anchor(*topology_, eng);
  std::fill(generated_.begin(), generated_.end(), 0);
}

void ChannelBlock::check_instant(int t) const {
  if (t < 1 || t > aging_->tau_c()) {
    throw std::out_of_range("instant " + std::to_string(t) + " outside resource block [1, " +
                            std::to_string(aging_->tau_c()) + "]");
  }
}

void ChannelBlock::generate_innovations(int t, int k) {
  const int num_aps = topology_->num_aps;
  const int num_ues = topology_->num_ues;
  Engine eng = make_engine(seed_, {drop_, tag(Stream::kInnovation), realization_, static_cast<std::uint64_t>(t),
                                   static_cast<std::uint64_t>(k)});
  cx* base = innovations_.data() + (static_cast<std::size_t>(t) * num_ues + k) * num_aps * n_;
  for (int m = 0; m < num_aps; ++m) {
    const int p = topology_->pair(m, k);
    draw_channel(topology_->h_bar[p], topology_->r_sqrt[p], eng, gauss_, base + static_cast<std::size_t>(m) * n_);
  }
  generated_[static_cast<std::size_t>(t) * num_ues + k] = 1;
}

std::span<const cx> ChannelBlock::innovation(int m, int k, int t) {
  check_instant(t);
  const int num_ues = topology_->num_ues;
  if (!generated_[static_cast<std::size_t>(t) * num_ues + k]) generate_innovations(t, k);
  const std::size_t offset = ((static_cast<std::size_t>(t) * num_ues + k) * topology_->num_aps + m) * n_;
  return {innovations_.data() + offset, static_cast<std::size_t>(n_)};
}

arma::cx_vec ChannelBlock::channel_at(int m, int k, int t) {
  check_instant(t);
  const auto h = anchor(m, k);
  const double rho = aging_->rho(k, t);
  arma::cx_vec out(n_);
  if (t == aging_->lambda()) {
    for (int i = 0; i < n_; ++i) out[i] = h[i];
    return out;
  }
  const double rho_bar = aging_->rho_bar(k, t);
  const auto f = innovation(m, k, t);
  for (int i = 0; i < n_; ++i) out[i] = rho * h[i] + rho_bar * f[i];
  return out;
}

}  // namespace cfrsma
