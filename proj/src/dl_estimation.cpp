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

#include "cfrsma/dl_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cfrsma/linalg.hpp"

namespace cfrsma {

namespace {

void finish_stats(ScalarStats& s, double channel_var, double innovation_var, double noise_w) {
  const double rho = s.rho;
  const double rho_bar_sq = std::max(0.0, 1.0 - rho * rho);
  s.r = channel_var;
  s.theta = rho * channel_var;
  s.psi = rho * rho * channel_var + rho_bar_sq * innovation_var + noise_w;
  s.pilot_mean = rho * s.mean;
}

void finish_estimator(ScalarStats& s, const std::string& what) {
  if (!(s.psi > 0.0) || !std::isfinite(s.psi)) {
    throw StatisticsError("pilot observation variance of " + what + " is not positive");
  }
  s.r_hat = std::norm(s.theta) / s.psi;
  s.r_tilde = s.r - s.r_hat;
}

std::string common_name(int l, int k) { return "common channel (cluster " + std::to_string(l) + ", UE " + std::to_string(k) + ")"; }
std::string private_name(int k) { return "private channel of UE " + std::to_string(k); }

/// Running moments of a pair (a, y), shifted by the first sample. Means are
/// taken from the conditional samples, central moments from the raw ones.
/// y is observed without receiver noise; its known variance is added at the end.
struct PairMoments {
  bool started = false;
  cx shift_a{}, shift_y{};
  cx sum_a{}, sum_y{}, sum_ya{};
  cx cond_a{}, cond_y{};
  double sum_aa = 0.0, sum_yy = 0.0;
  long count = 0;

  void add(cx a, cx y, cx a_cond, cx y_cond) {
    if (!started) {
      shift_a = a;
      shift_y = y;
      started = true;
    }
    const cx da = a - shift_a;
    const cx dy = y - shift_y;
    sum_a += da;
    sum_y += dy;
    sum_aa += std::norm(da);
    sum_yy += std::norm(dy);
    sum_ya += dy * std::conj(da);
    cond_a += a_cond;
    cond_y += y_cond;
    ++count;
  }

  void fill(ScalarStats& s, double noise_w) const {
    const double n = static_cast<double>(count);
    const cx ma = sum_a / n;
    const cx my = sum_y / n;
    s.mean = cond_a / n;
    s.pilot_mean = cond_y / n;
    s.r = sum_aa / n - std::norm(ma);
    s.psi = sum_yy / n - std::norm(my) + noise_w;
    s.theta = sum_ya / n - my * std::conj(ma);
  }
};

struct MeanVar {
  bool started = false;
  cx shift{}, sum{}, cond{};
  double sum_sq = 0.0;
  long count = 0;
  void add(cx a, cx a_cond) {
    if (!started) {
      shift = a;
      started = true;
    }
    const cx d = a - shift;
    sum += d;
    sum_sq += std::norm(d);
    cond += a_cond;
    ++count;
  }
  cx mean() const { return cond / static_cast<double>(count); }
  double var() const {
    const cx m = sum / static_cast<double>(count);
    return sum_sq / static_cast<double>(count) - std::norm(m);
  }
};

cx anchor_common(const ChannelBlock& block, const PrecoderSet& precoders, int l, int k) {
  const Topology& topology = block.topology();
  cx sum{};
  for (int m : topology.aps_in_cluster[l]) {
    sum += std::sqrt(precoders.plan->p_common[m]) * cdot(block.anchor(m, k), precoders.common_of(m));
  }
  return sum;
}

cx anchor_private(const ChannelBlock& block, const PrecoderSet& precoders, int k, int i) {
  const Topology& topology = block.topology();
  cx sum{};
  for (int m : topology.aps_in_cluster[topology.cluster_of_ue[i]]) {
    sum += std::sqrt(precoders.plan->p_private[m]) * cdot(block.anchor(m, k), precoders.private_of(topology.pair(m, i)));
  }
  return sum;
}


// Expectation of a channel given only UE k's own channels: every other
// contribution to the estimate (other UEs, receiver noise) is independent and
// zero mean, so only the part of the UL pilot that carries UE k survives.
cx own_part(ChannelBlock& block, const UlStatistics& ul, double pilot_amp, int m, int i, int k, int t) {
  const Topology& topology = block.topology();
  const int slot = topology.pilot_index[i];
  if (topology.pilot_index[k] != slot) return {};
  const arma::cx_vec h_pilot = block.channel_at(m, k, slot);
  const arma::cx_vec h_obs = t == block.aging().lambda() ? arma::cx_vec(block.anchor(m, k).data(), topology.antennas)
                                                         : block.channel_at(m, k, t);
  return pilot_amp * arma::cdot(h_obs, ul.gain[topology.pair(m, i)] * h_pilot);
}

cx conditional_common(ChannelBlock& block, const UlStatistics& ul, const PrecoderPlan& plan, double pilot_amp, int l,
                      int k, int t) {
  const Topology& topology = block.topology();
  cx sum{};
  for (int m : topology.aps_in_cluster[l]) {
    cx inner{};
    for (int i : topology.ues_in_cluster[l]) inner += own_part(block, ul, pilot_amp, m, i, k, t);
    sum += std::sqrt(plan.p_common[m] * plan.eta_common[m]) * inner;
  }
  return sum;
}

cx conditional_private(ChannelBlock& block, const UlStatistics& ul, const PrecoderPlan& plan, double pilot_amp, int k,
                       int i, int t) {
  const Topology& topology = block.topology();
  cx sum{};
  for (int m : topology.aps_in_cluster[topology.cluster_of_ue[i]]) {
    sum += std::sqrt(plan.p_private[m] * plan.eta_private[topology.pair(m, i)]) *
           own_part(block, ul, pilot_amp, m, i, k, t);
  }
  return sum;
}

}  // namespace

LinkMoments link_moments(const Topology& topology, const UlStatistics& ul, const AgingProfile& aging, double pilot_w,
                         int m, int i, int k) {
  const int p_obs = topology.pair(m, k);
  const int p_src = topology.pair(m, i);
  const arma::cx_mat& r_bar = topology.r_bar[p_obs];
  LinkMoments out;
  out.innovation = std::real(trace_of_product(ul.r_hat[p_src], r_bar));
  out.variance = out.innovation;
  const int slot = topology.pilot_index[i];
  if (topology.pilot_index[k] == slot) {
    // UE k's own pilot is inside the observation that built the estimate.
    const double c = std::sqrt(pilot_w) * aging.rho(k, slot);
    const arma::cx_mat& g = ul.gain[p_src];
    out.mean = c * trace_of_product(g, r_bar);
    const arma::cx_vec& h_bar = topology.h_bar[p_obs];
    const cx los = arma::cdot(h_bar, g * h_bar);
    out.variance -= c * c * std::norm(los);
  }
  return out;
}

DlStatistics dl_stats_closed_form(const Topology& topology, const UlStatistics& ul, const PrecoderPlan& plan,
                                  const AgingProfile& aging, const Timing& timing, const SimConfig& config) {
  const int num_ues = topology.num_ues;
  const int num_clusters = topology.num_clusters;
  const double pilot_w = config.ul_pilot_w();
  const double noise_w = config.noise_w();

  DlStatistics out;
  out.num_ues = num_ues;
  out.num_clusters = num_clusters;
  out.has_common = config.has_common_stream();

  if (out.has_common) {
    out.common.resize(static_cast<std::size_t>(num_clusters) * num_ues);
    for (int l = 0; l < num_clusters; ++l) {
      for (int k = 0; k < num_ues; ++k) {
        ScalarStats& s = out.common[static_cast<std::size_t>(l) * num_ues + k];
        s.rho = aging.rho(k, timing.dl_common_instant(l));
        double var = 0.0, innovation = 0.0;
        for (int m : topology.aps_in_cluster[l]) {
          const double w = plan.p_common[m] * plan.eta_common[m];
          for (int i : topology.ues_in_cluster[l]) {
            const LinkMoments lm = link_moments(topology, ul, aging, pilot_w, m, i, k);
            s.mean += std::sqrt(w) * lm.mean;
            var += w * lm.variance;
            innovation += w * lm.innovation;
          }
        }
        finish_stats(s, var, innovation, noise_w);
        finish_estimator(s, common_name(l, k));
      }
    }
  }

  out.priv.resize(num_ues);
  out.private_means.resize(num_ues);
  out.private_var.resize(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    ScalarStats& s = out.priv[k];
    s.rho = aging.rho(k, timing.dl_private_instant(topology.pilot_index[k]));
    const double rho_sq = s.rho * s.rho;
    const double rho_bar_sq = std::max(0.0, 1.0 - rho_sq);
    double observation = noise_w;
    cx observation_mean{};
    for (int i : topology.pilot_sets[k]) {
      cx mean{};
      double var = 0.0, innovation = 0.0;
      for (int m : topology.aps_in_cluster[topology.cluster_of_ue[i]]) {
        const double w = plan.p_private[m] * plan.eta_private[topology.pair(m, i)];
        const LinkMoments lm = link_moments(topology, ul, aging, pilot_w, m, i, k);
        mean += std::sqrt(w) * lm.mean;
        var += w * lm.variance;
        innovation += w * lm.innovation;
      }
      out.private_means[k].push_back(mean);
      out.private_var[k].push_back(var);
      observation += rho_sq * var + rho_bar_sq * innovation;
      observation_mean += s.rho * mean;
      if (i == k) {
        s.mean = mean;
        s.r = var;
        s.theta = s.rho * var;
      }
    }
    s.psi = observation;
    s.pilot_mean = observation_mean;
    finish_estimator(s, private_name(k));
  }
  return out;
}

DlStatistics dl_stats_monte_carlo(const Topology& topology, const UlStatistics& ul, const PrecoderPlan& plan,
                                  const AgingProfile& aging, const Timing& timing, const SimConfig& config,
                                  int samples, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("Monte Carlo statistics need at least 2 samples");
  const int num_ues = topology.num_ues;
  const int num_clusters = topology.num_clusters;
  const bool has_common = config.has_common_stream();
  const std::uint64_t oracle_seed = stream_key(seed, {tag(Stream::kOracle)});
  SimConfig oracle_config = config;
  oracle_config.seed = oracle_seed;
  const double noise_w = config.noise_w();
  const double pilot_amp = std::sqrt(config.ul_pilot_w());
  const int lambda = timing.lambda();

  ChannelBlock block(topology, aging, oracle_seed, 0);
  std::vector<PairMoments> common(has_common ? static_cast<std::size_t>(num_clusters) * num_ues : 0);
  std::vector<PairMoments> priv(num_ues);
  std::vector<std::vector<MeanVar>> sources(num_ues);
  std::vector<std::vector<MeanVar>> source_pilots(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    sources[k].resize(topology.pilot_sets[k].size());
    source_pilots[k].resize(topology.pilot_sets[k].size());
  }

  for (int r = 0; r < samples; ++r) {
    block.start_realization(static_cast<std::uint64_t>(r));
    const UlEstimate est = estimate_ul(block, ul, oracle_config, 0);
    const PrecoderSet precoders = build_precoders(topology, est, plan);
    if (has_common) {
      for (int l = 0; l < num_clusters; ++l) {
        for (int k = 0; k < num_ues; ++k) {
          const int t = timing.dl_common_instant(l);
          const cx a = anchor_common(block, precoders, l, k);
          const cx y = receive_dl_common_pilot(block, precoders, timing, l, k, cx{});
          common[static_cast<std::size_t>(l) * num_ues + k].add(
              a, y, conditional_common(block, ul, plan, pilot_amp, l, k, lambda),
              conditional_common(block, ul, plan, pilot_amp, l, k, t));
        }
      }
    }
    for (int k = 0; k < num_ues; ++k) {
      // Sources in other clusters use disjoint APs, hence are independent of
      // the own private channel: each source is tracked on its own.
      const auto& set = topology.pilot_sets[k];
      const int t = timing.dl_private_instant(topology.pilot_index[k]);
      for (std::size_t idx = 0; idx < set.size(); ++idx) {
        const int i = set[idx];
        const cx a = anchor_private(block, precoders, k, i);
        const cx a_pilot = effective_private(block, precoders, k, i, t);
        const cx a_cond = conditional_private(block, ul, plan, pilot_amp, k, i, lambda);
        const cx pilot_cond = conditional_private(block, ul, plan, pilot_amp, k, i, t);
        sources[k][idx].add(a, a_cond);
        source_pilots[k][idx].add(a_pilot, pilot_cond);
        if (i == k) priv[k].add(a, a_pilot, a_cond, pilot_cond);
      }
    }
  }

  DlStatistics out;
  out.num_ues = num_ues;
  out.num_clusters = num_clusters;
  out.has_common = has_common;
  if (has_common) {
    out.common.resize(common.size());
    for (int l = 0; l < num_clusters; ++l) {
      for (int k = 0; k < num_ues; ++k) {
        const std::size_t idx = static_cast<std::size_t>(l) * num_ues + k;
        ScalarStats& s = out.common[idx];
        s.rho = aging.rho(k, timing.dl_common_instant(l));
        common[idx].fill(s, noise_w);
        finish_estimator(s, common_name(l, k));
      }
    }
  }
  out.priv.resize(num_ues);
  out.private_means.resize(num_ues);
  out.private_var.resize(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    ScalarStats& s = out.priv[k];
    s.rho = aging.rho(k, timing.dl_private_instant(topology.pilot_index[k]));
    priv[k].fill(s, noise_w);
    s.psi = noise_w;
    s.pilot_mean = cx{};
    for (const MeanVar& mv : source_pilots[k]) {
      s.psi += mv.var();
      s.pilot_mean += mv.mean();
    }
    finish_estimator(s, private_name(k));
    for (const MeanVar& mv : sources[k]) {
      out.private_means[k].push_back(mv.mean());
      out.private_var[k].push_back(mv.var());
    }
  }
  return out;
}

namespace {

struct Checker {
  double tolerance;
  StatsComparison result;

  void check(double ref, double cand, double dominant, const std::string& name) {
    const double mag = std::abs(ref);
    const double allowed = mag >= 0.01 * dominant ? tolerance * mag : 0.05 * (mag > 0.0 ? mag : 0.01 * dominant);
    const double dev = std::abs(cand - ref);
    double ratio = allowed > 0.0 ? dev / allowed : (dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (!std::isfinite(cand)) ratio = std::numeric_limits<double>::infinity();
    if (ratio > result.worst_ratio || result.worst_name.empty()) {
      result.worst_ratio = ratio;
      result.worst_name = name;
    }
  }
  void check(cx ref, cx cand, double dominant, const std::string& name) {
    const double mag = std::abs(ref);
    const double allowed = mag >= 0.01 * dominant ? tolerance * mag : 0.05 * (mag > 0.0 ? mag : 0.01 * dominant);
    const double dev = std::abs(cand - ref);
    double ratio = allowed > 0.0 ? dev / allowed : (dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (!std::isfinite(dev)) ratio = std::numeric_limits<double>::infinity();
    if (ratio > result.worst_ratio || result.worst_name.empty()) {
      result.worst_ratio = ratio;
      result.worst_name = name;
    }
  }

  void check_stats(const ScalarStats& ref, const ScalarStats& cand, const std::string& what) {
    const double amplitude = std::max({std::abs(ref.mean), std::abs(ref.pilot_mean), std::sqrt(std::max(ref.r, 0.0)),
                                       std::sqrt(std::max(ref.psi, 0.0))});
    const double power = std::max({ref.r, ref.psi, std::abs(ref.theta), ref.r_hat, std::abs(ref.r_tilde)});
    check(ref.mean, cand.mean, amplitude, "mean of " + what);
    check(ref.pilot_mean, cand.pilot_mean, amplitude, "pilot mean of " + what);
    check(ref.theta, cand.theta, power, "theta of " + what);
    check(ref.psi, cand.psi, power, "psi of " + what);
    check(ref.r, cand.r, power, "r of " + what);
    check(ref.r_hat, cand.r_hat, power, "r_hat of " + what);
    check(ref.r_tilde, cand.r_tilde, power, "r_tilde of " + what);
  }
};

}  // namespace

StatsComparison compare_statistics(const DlStatistics& reference, const DlStatistics& candidate, double tolerance) {
  if (reference.num_ues != candidate.num_ues || reference.has_common != candidate.has_common ||
      reference.common.size() != candidate.common.size()) {
    throw StatisticsError("statistic sets describe different networks");
  }
  Checker c{tolerance, {}};
  for (int l = 0; reference.has_common && l < reference.num_clusters; ++l) {
    for (int k = 0; k < reference.num_ues; ++k) {
      c.check_stats(reference.common_of(l, k), candidate.common_of(l, k), common_name(l, k));
    }
  }
  for (int k = 0; k < reference.num_ues; ++k) {
    c.check_stats(reference.priv[k], candidate.priv[k], private_name(k));
    double amplitude = 0.0, power = 0.0;
    for (std::size_t i = 0; i < reference.private_means[k].size(); ++i) {
      amplitude = std::max({amplitude, std::abs(reference.private_means[k][i]),
                            std::sqrt(std::max(reference.private_var[k][i], 0.0))});
      power = std::max(power, reference.private_var[k][i]);
    }
    for (std::size_t i = 0; i < reference.private_means[k].size(); ++i) {
      const std::string what = "private channel " + std::to_string(i) + " seen by UE " + std::to_string(k);
      c.check(reference.private_means[k][i], candidate.private_means[k][i], amplitude, "mean of " + what);
      c.check(reference.private_var[k][i], candidate.private_var[k][i], power, "r of " + what);
    }
  }
  return c.result;
}

arma::cx_mat lambda_matrix(const Topology& topology, int m, int i, int k) {
  const arma::cx_mat& r_obs = topology.r_bar[topology.pair(m, k)];
  const double cond = arma::rcond(r_obs);
  if (!(cond > 1e-12)) {
    throw StatisticsError("correlation matrix of AP " + std::to_string(m) + ", UE " + std::to_string(k) +
                          " is singular");
  }
  return topology.r_bar[topology.pair(m, i)] * arma::inv(r_obs);
}

cx effective_common(ChannelBlock& block, const PrecoderSet& precoders, int l, int k, int t) {
  const Topology& topology = block.topology();
  cx sum{};
  for (int m : topology.aps_in_cluster[l]) {
    const arma::cx_vec h = block.channel_at(m, k, t);
    sum += std::sqrt(precoders.plan->p_common[m]) *
           cdot(h.memptr(), precoders.common_of(m).data(), topology.antennas);
  }
  return sum;
}

cx effective_private(ChannelBlock& block, const PrecoderSet& precoders, int k, int i, int t) {
  const Topology& topology = block.topology();
  cx sum{};
  for (int m : topology.aps_in_cluster[topology.cluster_of_ue[i]]) {
    const arma::cx_vec h = block.channel_at(m, k, t);
    sum += std::sqrt(precoders.plan->p_private[m]) *
           cdot(h.memptr(), precoders.private_of(topology.pair(m, i)).data(), topology.antennas);
  }
  return sum;
}

cx receive_dl_common_pilot(ChannelBlock& block, const PrecoderSet& precoders, const Timing& timing, int l, int k,
                           cx noise) {
  return effective_common(block, precoders, l, k, timing.dl_common_instant(l)) + noise;
}

cx receive_dl_private_pilot(ChannelBlock& block, const PrecoderSet& precoders, const Timing& timing, int k, cx noise) {
  const Topology& topology = block.topology();
  const int t = timing.dl_private_instant(topology.pilot_index[k]);
  cx y = noise;
  for (int i : topology.pilot_sets[k]) y += effective_private(block, precoders, k, i, t);
  return y;
}

cx scalar_lmmse(cx y, const ScalarStats& stats) {
  if (!(stats.psi > 0.0)) throw StatisticsError("pilot observation variance is not positive");
  return stats.mean + std::conj(stats.theta) / stats.psi * (y - stats.pilot_mean);
}

DlEstimate estimate_dl(ChannelBlock& block, const PrecoderSet& precoders, const DlStatistics& stats,
                       const Timing& timing, const SimConfig& config, std::uint64_t drop) {
  const Topology& topology = block.topology();
  const int num_ues = topology.num_ues;
  const int num_clusters = topology.num_clusters;
  DlEstimate out;
  out.priv.resize(num_ues);
  if (stats.has_common) out.common.resize(static_cast<std::size_t>(num_clusters) * num_ues);

  if (config.mode == Mode::kRsmaNoDlPilots) {
    for (std::size_t i = 0; i < out.common.size(); ++i) out.common[i] = stats.common[i].mean;
    for (int k = 0; k < num_ues; ++k) out.priv[k] = stats.priv[k].mean;
    return out;
  }

  const double noise_amp = std::sqrt(config.noise_w());
  ComplexGaussian gauss;
  if (stats.has_common) {
    Engine eng = make_engine(config.seed, {drop, tag(Stream::kDlCommonNoise), block.realization()});
    out.obs_common.resize(out.common.size());
    for (int l = 0; l < num_clusters; ++l) {
      for (int k = 0; k < num_ues; ++k) {
        const std::size_t idx = static_cast<std::size_t>(l) * num_ues + k;
        out.obs_common[idx] = receive_dl_common_pilot(block, precoders, timing, l, k, noise_amp * gauss(eng));
        out.common[idx] = dl_common_lmmse(out.obs_common[idx], stats.common[idx]);
      }
    }
  }
  Engine eng = make_engine(config.seed, {drop, tag(Stream::kDlPrivateNoise), block.realization()});
  out.obs_private.resize(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    out.obs_private[k] = receive_dl_private_pilot(block, precoders, timing, k, noise_amp * gauss(eng));
    out.priv[k] = dl_private_lmmse(out.obs_private[k], stats.priv[k]);
  }
  return out;
}

}  // namespace cfrsma
