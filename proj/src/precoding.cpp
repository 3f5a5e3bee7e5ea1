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

#include "cfrsma/precoding.hpp"

#include <string>

namespace cfrsma {

PowerSplit power_split(double split, double p_max_w, int cluster_ue_count) {
  if (!(split >= 0.0 && split <= 1.0)) throw ConfigError("power split must lie in [0, 1]");
  if (cluster_ue_count <= 0) throw ConfigError("power split requested for a cluster without UEs");
  return {(1.0 - split) * p_max_w, split * p_max_w / cluster_ue_count};
}

PrecoderPlan plan_precoders(const Topology& topology, const UlStatistics& stats, const SimConfig& config) {
  const double split = config.effective_power_split();
  PrecoderPlan plan;
  plan.eta_common.assign(topology.num_aps, 0.0);
  plan.eta_private.assign(static_cast<std::size_t>(topology.num_aps) * topology.num_ues, 0.0);
  plan.p_common.assign(topology.num_aps, 0.0);
  plan.p_private.assign(topology.num_aps, 0.0);
  for (int m = 0; m < topology.num_aps; ++m) {
    const auto& ues = topology.ues_in_cluster[topology.cluster_of_ap[m]];
    const PowerSplit powers = power_split(split, config.p_max_w(), static_cast<int>(ues.size()));
    plan.p_common[m] = powers.common;
    plan.p_private[m] = powers.private_stream;
    double total = 0.0;
    for (int k : ues) {
      const double tr = stats.r_hat_trace[topology.pair(m, k)];
      if (!(tr > 0.0)) {
        throw NumericError("estimate of UE " + std::to_string(k) + " at AP " + std::to_string(m) +
                           " carries no power; private precoder cannot be normalized");
      }
      plan.eta_private[topology.pair(m, k)] = 1.0 / tr;
      total += tr;
    }
    plan.eta_common[m] = 1.0 / total;
  }
  return plan;
}

arma::cx_vec build_private_precoder(const Topology& topology, const UlEstimate& est, const PrecoderPlan& plan, int m,
                                    int k) {
  const int p = topology.pair(m, k);
  if (!topology.serves(m, k)) throw std::invalid_argument("AP does not serve this UE");
  const double scale = std::sqrt(plan.eta_private[p]);
  const auto h = est.estimate(p);
  arma::cx_vec v(topology.antennas);
  for (int i = 0; i < topology.antennas; ++i) v[i] = scale * h[i];
  return v;
}

arma::cx_vec build_common_precoder(const Topology& topology, const UlEstimate& est, const PrecoderPlan& plan, int l,
                                   int m) {
  if (topology.cluster_of_ap[m] != l) throw std::invalid_argument("AP is not in this cluster");
  arma::cx_vec v(topology.antennas, arma::fill::zeros);
  for (int k : topology.ues_in_cluster[l]) {
    const auto h = est.estimate(topology.pair(m, k));
    for (int i = 0; i < topology.antennas; ++i) v[i] += h[i];
  }
  return std::sqrt(plan.eta_common[m]) * v;
}

PrecoderSet build_precoders(const Topology& topology, const UlEstimate& est, const PrecoderPlan& plan) {
  const int n = topology.antennas;
  PrecoderSet set;
  set.antennas = n;
  set.plan = &plan;
  set.common.assign(static_cast<std::size_t>(topology.num_aps) * n, cx{});
  set.priv.assign(static_cast<std::size_t>(topology.num_aps) * topology.num_ues * n, cx{});
  for (int m = 0; m < topology.num_aps; ++m) {
    const double common_scale = std::sqrt(plan.eta_common[m]);
    cx* vc = set.common.data() + static_cast<std::size_t>(m) * n;
    for (int k : topology.ues_in_cluster[topology.cluster_of_ap[m]]) {
      const int p = topology.pair(m, k);
      const auto h = est.estimate(p);
      const double scale = std::sqrt(plan.eta_private[p]);
      cx* vp = set.priv.data() + static_cast<std::size_t>(p) * n;
      for (int i = 0; i < n; ++i) {
        vp[i] = scale * h[i];
        vc[i] += h[i];
      }
    }
    for (int i = 0; i < n; ++i) vc[i] *= common_scale;
  }
  return set;
}

}  // namespace cfrsma
