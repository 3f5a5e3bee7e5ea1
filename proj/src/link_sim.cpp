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

#include "cfrsma/link_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "cfrsma/linalg.hpp"

namespace cfrsma {

double sinr(const SinrTerms& terms) {
  const double signal = std::norm(terms.desired);
  if (signal == 0.0) return 0.0;
  double denom = 0.0;
  for (const cx& d : terms.disturbance) denom += std::norm(d);
  if (!(denom > 0.0)) throw NumericError("SINR denominator vanished");
  return signal / denom;
}

std::string to_string(StatsSource source) {
  return source == StatsSource::kClosedForm ? "closed_form" : "monte_carlo";
}

StatsSource stats_source_from_string(const std::string& text) {
  if (text == "closed_form") return StatsSource::kClosedForm;
  if (text == "monte_carlo") return StatsSource::kMonteCarlo;
  throw ConfigError("unknown statistics source '" + text + "' (expected closed_form or monte_carlo)");
}

DropModel prepare_drop(const SimConfig& config, std::uint64_t drop, const SimOptions& options) {
  DropModel model;
  model.config = config;
  model.drop = drop;
  model.timing = resolve_timing(config);
  model.topology = drop_network(config, drop);
  model.aging = AgingProfile(config, model.timing);
  model.ul = ul_statistics(model.topology, model.aging, config);
  model.plan = plan_precoders(model.topology, model.ul, config);
  const std::uint64_t oracle_seed = stream_key(config.seed, {drop});
  if (options.stats_source == StatsSource::kMonteCarlo) {
    model.dl = dl_stats_monte_carlo(model.topology, model.ul, model.plan, model.aging, model.timing, config,
                                    options.stats_samples, oracle_seed);
  } else {
    model.dl = dl_stats_closed_form(model.topology, model.ul, model.plan, model.aging, model.timing, config);
  }
  if (options.verify_samples > 0) {
    const DlStatistics closed =
        options.stats_source == StatsSource::kClosedForm
            ? model.dl
            : dl_stats_closed_form(model.topology, model.ul, model.plan, model.aging, model.timing, config);
    const DlStatistics sampled = dl_stats_monte_carlo(model.topology, model.ul, model.plan, model.aging,
                                                      model.timing, config, options.verify_samples, oracle_seed);
    const StatsComparison cmp = compare_statistics(closed, sampled, options.verify_tolerance);
    model.stats_deviation = cmp.worst_ratio;
    if (cmp.worst_ratio > 1.0) {
      throw StatisticsError("closed-form " + cmp.worst_name + " deviates from its sampled value in drop " +
                            std::to_string(drop) + " (" + std::to_string(cmp.worst_ratio) +
                            " times the allowed deviation)");
    }
  }
  return model;
}

RealizationState start_realization(ChannelBlock& block, const DropModel& model, std::uint64_t realization) {
  const Topology& topology = model.topology;
  block.start_realization(realization);
  RealizationState state;
  state.ul = estimate_ul(block, model.ul, model.config, model.drop);
  state.precoders = build_precoders(topology, state.ul, model.plan);
  state.precoders.plan = &model.plan;
  state.dl = estimate_dl(block, state.precoders, model.dl, model.timing, model.config, model.drop);

  const int num_ues = topology.num_ues;
  const int n = topology.antennas;
  if (model.dl.has_common) {
    state.common_anchor.assign(static_cast<std::size_t>(topology.num_clusters) * num_ues, cx{});
    for (int l = 0; l < topology.num_clusters; ++l) {
      for (int k = 0; k < num_ues; ++k) {
        cx sum{};
        for (int m : topology.aps_in_cluster[l]) {
          sum += std::sqrt(model.plan.p_common[m]) * cdot(block.anchor(m, k).data(), state.precoders.common_of(m).data(), n);
        }
        state.common_anchor[static_cast<std::size_t>(l) * num_ues + k] = sum;
      }
    }
  }
  state.private_anchor.assign(num_ues, cx{});
  for (int k = 0; k < num_ues; ++k) {
    cx sum{};
    for (int m : topology.aps_in_cluster[topology.cluster_of_ue[k]]) {
      const int p = topology.pair(m, k);
      sum += std::sqrt(model.plan.p_private[m]) * cdot(block.anchor(m, k).data(), state.precoders.private_of(p).data(), n);
    }
    state.private_anchor[k] = sum;
  }
  return state;
}

InstantDraw draw_instant(const DropModel& model, std::uint64_t realization, int t) {
  const Topology& topology = model.topology;
  const auto instant = static_cast<std::uint64_t>(t);
  InstantDraw draw;
  ComplexGaussian gauss;
  if (model.dl.has_common) {
    Engine eng = make_engine(model.config.seed, {model.drop, tag(Stream::kCommonSymbols), realization, instant});
    draw.common_symbols.resize(topology.num_clusters);
    for (cx& x : draw.common_symbols) x = gauss.unit_phasor(eng);
  }
  {
    Engine eng = make_engine(model.config.seed, {model.drop, tag(Stream::kPrivateSymbols), realization, instant});
    draw.private_symbols.resize(topology.num_ues);
    for (cx& x : draw.private_symbols) x = gauss.unit_phasor(eng);
  }
  {
    Engine eng = make_engine(model.config.seed, {model.drop, tag(Stream::kUeNoise), realization, instant});
    const double amp = std::sqrt(model.config.noise_w());
    draw.noise.resize(topology.num_ues);
    for (cx& n : draw.noise) n = amp * gauss(eng);
  }
  return draw;
}

InstantResult simulate_instant(ChannelBlock& block, const DropModel& model, const RealizationState& state, int t) {
  const Topology& topology = model.topology;
  const PrecoderPlan& plan = model.plan;
  const PrecoderSet& pre = state.precoders;
  const int num_aps = topology.num_aps;
  const int num_ues = topology.num_ues;
  const int num_clusters = topology.num_clusters;
  const int n = topology.antennas;
  const bool common = model.dl.has_common;

  InstantResult out;
  out.draw = draw_instant(model, block.realization(), t);
  const InstantDraw& draw = out.draw;

  // Aggregate private transmit vector of every AP.
  std::vector<cx> sent(static_cast<std::size_t>(num_aps) * n, cx{});
  for (int m = 0; m < num_aps; ++m) {
    cx* s = sent.data() + static_cast<std::size_t>(m) * n;
    const double amp = std::sqrt(plan.p_private[m]);
    for (int j : topology.ues_in_cluster[topology.cluster_of_ap[m]]) {
      const double wr = amp * draw.private_symbols[j].real();
      const double wi = amp * draw.private_symbols[j].imag();
      const cx* v = pre.private_of(topology.pair(m, j)).data();
      for (int i = 0; i < n; ++i) {
        s[i] = {s[i].real() + wr * v[i].real() - wi * v[i].imag(), s[i].imag() + wr * v[i].imag() + wi * v[i].real()};
      }
    }
  }
  std::vector<double> common_amp(num_aps);
  for (int m = 0; m < num_aps; ++m) common_amp[m] = std::sqrt(plan.p_common[m]);

  if (common) out.common.resize(num_ues);
  out.priv.resize(num_ues);
  std::vector<cx> common_innov(num_clusters);
  for (int k = 0; k < num_ues; ++k) {
    const int own = topology.cluster_of_ue[k];
    const double rho = model.aging.rho(k, t);
    const double rho_bar = model.aging.rho_bar(k, t);

    cx private_anchor_total{}, private_innov_total{}, own_innov{};
    std::fill(common_innov.begin(), common_innov.end(), cx{});
    for (int m = 0; m < num_aps; ++m) {
      const cx* s = sent.data() + static_cast<std::size_t>(m) * n;
      private_anchor_total += cdot(block.anchor(m, k).data(), s, n);
      if (rho_bar == 0.0) continue;
      const cx* f = block.innovation(m, k, t).data();
      private_innov_total += cdot(f, s, n);
      const int l = topology.cluster_of_ap[m];
      if (common) common_innov[l] += common_amp[m] * cdot(f, pre.common_of(m).data(), n);
      if (l == own) {
        own_innov += std::sqrt(plan.p_private[m]) * cdot(f, pre.private_of(topology.pair(m, k)).data(), n);
      }
    }
    const cx private_total = rho * private_anchor_total + rho_bar * private_innov_total;
    const cx own_now = rho * state.private_anchor[k] + rho_bar * own_innov;
    const cx x_own = draw.private_symbols[k];

    cx residual{};
    if (common) {
      for (int l = 0; l < num_clusters; ++l) {
        if (l == own) continue;
        const std::size_t idx = static_cast<std::size_t>(l) * num_ues + k;
        const cx now = rho * state.common_anchor[idx] + rho_bar * common_innov[l];
        residual += (now - state.dl.common[idx]) * draw.common_symbols[l];
      }
      const std::size_t idx = static_cast<std::size_t>(own) * num_ues + k;
      const cx xc = draw.common_symbols[own];
      SinrTerms& c = out.common[k];
      c.desired = rho * state.dl.common[idx] * xc;
      c.disturbance[0] = rho * (state.common_anchor[idx] - state.dl.common[idx]) * xc;
      c.disturbance[1] = rho_bar * common_innov[own] * xc;
      c.disturbance[2] = residual;
      c.disturbance[3] = private_total;
      c.disturbance[4] = draw.noise[k];
    }
    SinrTerms& p = out.priv[k];
    p.desired = rho * state.dl.priv[k] * x_own;
    p.disturbance[0] = rho * (state.private_anchor[k] - state.dl.priv[k]) * x_own;
    p.disturbance[1] = rho_bar * own_innov * x_own;
    p.disturbance[2] = private_total - own_now * x_own;
    p.disturbance[3] = residual;
    p.disturbance[4] = draw.noise[k];
  }
  return out;
}

DropSeries simulate_drop(const DropModel& model, int realizations) {
  if (realizations <= 0) throw ConfigError("at least one realization per drop is required");
  const Topology& topology = model.topology;
  const int num_ues = topology.num_ues;
  const int num_clusters = topology.num_clusters;
  const int lambda = model.timing.lambda();
  const int last = model.timing.tau_c;
  const int instants = last - lambda + 1;
  const bool common = model.dl.has_common;

  std::vector<double> common_sum(common ? static_cast<std::size_t>(instants) * num_ues : 0, 0.0);
  std::vector<double> private_sum(static_cast<std::size_t>(instants) * num_ues, 0.0);

  ChannelBlock block(topology, model.aging, model.config.seed, model.drop);
  for (int r = 0; r < realizations; ++r) {
    const RealizationState state = start_realization(block, model, static_cast<std::uint64_t>(r));
    for (int t = lambda; t <= last; ++t) {
      const InstantResult res = simulate_instant(block, model, state, t);
      const std::size_t base = static_cast<std::size_t>(t - lambda) * num_ues;
      for (int k = 0; k < num_ues; ++k) {
        if (common) common_sum[base + k] += std::log2(1.0 + sinr(res.common[k]));
        private_sum[base + k] += std::log2(1.0 + sinr(res.priv[k]));
      }
    }
  }

  DropSeries series;
  series.lambda = lambda;
  series.last_instant = last;
  series.num_clusters = num_clusters;
  series.num_ues = num_ues;
  series.stats_deviation = model.stats_deviation;
  const double inv = 1.0 / realizations;
  series.private_ue.resize(private_sum.size());
  for (std::size_t i = 0; i < private_sum.size(); ++i) series.private_ue[i] = private_sum[i] * inv;
  series.common_ue.assign(private_sum.size(), 0.0);
  series.common_min.assign(static_cast<std::size_t>(instants) * num_clusters, 0.0);
  if (common) {
    for (std::size_t i = 0; i < common_sum.size(); ++i) series.common_ue[i] = common_sum[i] * inv;
    for (int ti = 0; ti < instants; ++ti) {
      for (int l = 0; l < num_clusters; ++l) {
        double lowest = 0.0;
        bool first = true;
        for (int k : topology.ues_in_cluster[l]) {
          const double v = series.common_ue[static_cast<std::size_t>(ti) * num_ues + k];
          if (first || v < lowest) lowest = v;
          first = false;
        }
        series.common_min[static_cast<std::size_t>(ti) * num_clusters + l] = lowest;
      }
    }
  }
  return series;
}

DropSe aggregate_drop(const DropSeries& series, int tau_c) {
  if (tau_c < series.lambda || tau_c > series.last_instant) {
    throw std::out_of_range("block length outside the simulated data instants");
  }
  DropSe out;
  out.common_cluster.assign(series.num_clusters, 0.0);
  out.private_ue.assign(series.num_ues, 0.0);
  double total = 0.0;
  for (int t = series.lambda; t <= tau_c; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t - series.lambda);
    double common = 0.0, priv = 0.0;
    for (int l = 0; l < series.num_clusters; ++l) {
      const double v = series.common_min[ti * series.num_clusters + l];
      common += v;
      out.common_cluster[l] += v;
    }
    for (int k = 0; k < series.num_ues; ++k) {
      const double v = series.private_ue[ti * series.num_ues + k];
      priv += v;
      out.private_ue[k] += v;
    }
    out.common += common;
    out.priv += priv;
    total += common + priv;
  }
  const double inv = 1.0 / tau_c;
  out.sum = total * inv;
  out.common *= inv;
  out.priv *= inv;
  for (double& v : out.common_cluster) v *= inv;
  for (double& v : out.private_ue) v *= inv;
  return out;
}

SeStat mean_and_stderr(const std::vector<double>& values) {
  SeStat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  s.mean = sum / n;
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(sq / (n - 1.0) / n);
  }
  return s;
}

namespace {

std::vector<DropSeries> run_drops(const SimConfig& config, const SimOptions& options) {
  validate(config);
  resolve_timing(config);
  if (config.drops <= 0 || config.realizations <= 0) throw ConfigError("drops and realizations must be positive");
  const int drops = config.drops;
  std::vector<DropSeries> results(drops);
  std::vector<std::exception_ptr> errors(drops);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int d = next.fetch_add(1); d < drops; d = next.fetch_add(1)) {
      try {
        const DropModel model = prepare_drop(config, static_cast<std::uint64_t>(d), options);
        results[d] = simulate_drop(model, config.realizations);
      } catch (...) {
        errors[d] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(options.threads, drops));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

SeReport build_report(const SimConfig& config, const std::vector<DropSeries>& series, int tau_c,
                      const SimOptions& options) {
  SeReport report;
  report.mode = config.mode;
  report.drops = config.drops;
  report.realizations = config.realizations;
  report.tau_c = tau_c;
  report.stats_source = options.stats_source;
  SimConfig hashed = config;
  hashed.tau_c = tau_c;
  report.config_hash = config_hash(hashed);

  std::vector<std::vector<double>> cluster_values(config.num_clusters);
  std::vector<std::vector<double>> ue_values(config.num_ues);
  for (const DropSeries& s : series) {
    report.lambda = s.lambda;
    report.stats_deviation = std::max(report.stats_deviation, s.stats_deviation);
    const DropSe d = aggregate_drop(s, tau_c);
    report.per_drop_sum.push_back(d.sum);
    report.per_drop_common.push_back(d.common);
    report.per_drop_private.push_back(d.priv);
    for (int l = 0; l < config.num_clusters; ++l) cluster_values[l].push_back(d.common_cluster[l]);
    for (int k = 0; k < config.num_ues; ++k) ue_values[k].push_back(d.private_ue[k]);
  }
  report.sum = mean_and_stderr(report.per_drop_sum);
  report.common = mean_and_stderr(report.per_drop_common);
  report.priv = mean_and_stderr(report.per_drop_private);
  for (const auto& v : cluster_values) report.common_cluster.push_back(mean_and_stderr(v));
  for (const auto& v : ue_values) report.private_ue.push_back(mean_and_stderr(v));
  return report;
}

}  // namespace

SeReport ergodic_se(const SimConfig& config, const SimOptions& options) {
  const std::vector<DropSeries> series = run_drops(config, options);
  return build_report(config, series, config.tau_c, options);
}

std::vector<SeReport> ergodic_se_block_lengths(const SimConfig& config, const std::vector<int>& tau_c_values,
                                               const SimOptions& options) {
  if (tau_c_values.empty()) throw ConfigError("no block lengths requested");
  SimConfig longest = config;
  longest.tau_c = *std::max_element(tau_c_values.begin(), tau_c_values.end());
  for (int tau_c : tau_c_values) {
    SimConfig probe = config;
    probe.tau_c = tau_c;
    validate(probe);
    resolve_timing(probe);
  }
  const std::vector<DropSeries> series = run_drops(longest, options);
  std::vector<SeReport> reports;
  for (int tau_c : tau_c_values) {
    SimConfig point = config;
    point.tau_c = tau_c;
    reports.push_back(build_report(point, series, tau_c, options));
  }
  return reports;
}

SeStat paired_difference(const SeReport& a, const SeReport& b) {
  if (a.per_drop_sum.size() != b.per_drop_sum.size()) throw std::invalid_argument("reports cover different drops");
  std::vector<double> diff(a.per_drop_sum.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.per_drop_sum[i] - b.per_drop_sum[i];
  return mean_and_stderr(diff);
}

}  // namespace cfrsma
