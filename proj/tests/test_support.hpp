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
#include "cfrsma/link_sim.hpp"

namespace cfrsma::testing {

/// Four APs with two antennas, four UEs in two clusters, 40 km/h.
inline SimConfig small_config(std::uint64_t seed = 11) {
  SimConfig c;
  c.num_aps = 4;
  c.antennas_per_ap = 2;
  c.num_ues = 4;
  c.num_clusters = 2;
  c.velocity_kmh = {40.0};
  c.seed = seed;
  return c;
}

/// Accumulates E[x y^H] for vectors of a fixed length.
class CrossMoment {
 public:
  explicit CrossMoment(int n) : sum_(n, n, arma::fill::zeros) {}
  void add(const arma::cx_vec& x, const arma::cx_vec& y) {
    sum_ += x * y.t();
    ++count_;
  }
  arma::cx_mat mean() const { return sum_ / static_cast<double>(count_); }

 private:
  arma::cx_mat sum_;
  long count_ = 0;
};

inline double relative_frobenius(const arma::cx_mat& estimate, const arma::cx_mat& reference) {
  return arma::norm(estimate - reference, "fro") / arma::norm(reference, "fro");
}

inline arma::cx_vec to_vec(std::span<const cx> s) {
  arma::cx_vec v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = s[i];
  return v;
}

/// Received data signal of UE k at instant t, assembled from the raw channels
/// and precoders, and the two post-SIC signals the decoder works on.
struct ReceivedSignals {
  cx total{};
  cx after_common_sic{};
  cx after_private_sic{};
};

inline ReceivedSignals received_signals(ChannelBlock& block, const DropModel& model, const RealizationState& state,
                                        const InstantDraw& draw, int k, int t) {
  const Topology& topo = model.topology;
  const PrecoderSet& pre = state.precoders;
  const bool common = model.dl.has_common;
  const int own = topo.cluster_of_ue[k];
  ReceivedSignals out;
  std::vector<cx> common_now(topo.num_clusters, cx{});
  for (int m = 0; m < topo.num_aps; ++m) {
    const int l = topo.cluster_of_ap[m];
    const arma::cx_vec h = block.channel_at(m, k, t);
    if (common) {
      const cx gain = std::sqrt(model.plan.p_common[m]) * arma::cdot(h, to_vec(pre.common_of(m)));
      common_now[l] += gain;
      out.total += gain * draw.common_symbols[l];
    }
    for (int j : topo.ues_in_cluster[l]) {
      out.total += std::sqrt(model.plan.p_private[m]) * arma::cdot(h, to_vec(pre.private_of(topo.pair(m, j)))) *
                   draw.private_symbols[j];
    }
  }
  out.total += draw.noise[k];
  out.after_common_sic = out.total;
  if (common) {
    for (int l = 0; l < topo.num_clusters; ++l) {
      if (l == own) continue;
      out.after_common_sic -= state.dl.common[static_cast<std::size_t>(l) * topo.num_ues + k] * draw.common_symbols[l];
    }
  }
  out.after_private_sic = out.after_common_sic;
  if (common) out.after_private_sic -= common_now[own] * draw.common_symbols[own];
  return out;
}

inline cx reassemble(const SinrTerms& terms) {
  cx sum = terms.desired;
  for (const cx& d : terms.disturbance) sum += d;
  return sum;
}

}  // namespace cfrsma::testing
