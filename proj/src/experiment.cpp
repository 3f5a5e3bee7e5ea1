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

#include "cfrsma/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "cfrsma/svg_plot.hpp"

namespace cfrsma {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split_list(value)) {
    int v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size() || v < 1) {
      throw ConfigError("'" + key + "' expects positive integers, got '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("'" + key + "' is empty");
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ConfigError("'" + key + "' expects numbers, got '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("'" + key + "' is empty");
  return out;
}

std::vector<Mode> parse_modes(const std::string& value) {
  std::vector<Mode> out;
  for (const std::string& item : split_list(value)) out.push_back(mode_from_string(item));
  if (out.empty()) throw ConfigError("'modes' is empty");
  return out;
}

template <typename T>
void require_increasing(const std::vector<T>& values, const std::string& axis) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i - 1] < values[i])) throw ConfigError("sweep axis " + axis + " must be strictly increasing");
  }
}

SimConfig point_config(const SweepSpec& spec, Mode mode, int ues, int clusters, double velocity) {
  SimConfig c = spec.base;
  c.mode = mode;
  c.num_ues = ues;
  c.num_clusters = clusters;
  c.velocity_kmh = {velocity};
  return c;
}

template <typename T>
std::vector<T> or_default(const std::vector<T>& values, T fallback) {
  return values.empty() ? std::vector<T>{fallback} : values;
}

struct Axes {
  std::vector<int> ues, clusters, block_lengths;
  std::vector<double> velocities;
  std::vector<Mode> modes;
};

Axes resolved_axes(const SweepSpec& spec) {
  Axes a;
  a.ues = or_default(spec.ues, spec.base.num_ues);
  a.clusters = or_default(spec.clusters, spec.base.num_clusters);
  a.block_lengths = or_default(spec.block_lengths, spec.base.tau_c);
  if (spec.velocities.empty()) {
    if (spec.base.velocity_kmh.size() != 1) throw ConfigError("sweeps need a single base velocity");
    a.velocities = {spec.base.velocity_kmh.front()};
  } else {
    a.velocities = spec.velocities;
  }
  a.modes = spec.modes;
  std::sort(a.modes.begin(), a.modes.end(),
            [](Mode x, Mode y) { return to_string(x) < to_string(y); });
  return a;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

SweepSpec preset_sweep(const std::string& name) {
  SweepSpec spec;
  spec.preset = name;
  if (name == "fig_a") {
    spec.base.num_aps = 32;
    spec.base.velocity_kmh = {40.0};
    spec.base.p_max_dbm = 30.0;
    spec.ues = {8, 16, 24, 32};
    spec.clusters = {1, 4, 8};
    spec.modes = {Mode::kRsmaDlPilots, Mode::kRsmaNoDlPilots};
  } else if (name == "fig_b") {
    spec.base.num_ues = 16;
    spec.base.p_max_dbm = 30.0;
    spec.clusters = {1, 2, 4, 8, 16};
    spec.velocities = {0.0, 50.0, 100.0, 150.0, 200.0};
    spec.modes = {Mode::kRsmaDlPilots, Mode::kSdma};
  } else if (name == "fig_c") {
    spec.base.num_clusters = 8;
    spec.base.num_ues = 24;
    spec.velocities = {20.0, 60.0, 100.0};
    spec.block_lengths = {20, 30, 40, 60, 80, 100, 150, 200};
    spec.modes = {Mode::kRsmaDlPilots, Mode::kSdma};
  } else if (name == "custom") {
    spec.modes = {spec.base.mode};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected fig_a, fig_b, fig_c or custom)");
  }
  return spec;
}

void apply_sweep_keys(SweepSpec& spec, const KeyValues& values) {
  KeyValues rest;
  for (const auto& [key, value] : values) {
    if (key == "preset") continue;  // handled by the caller before the spec exists
    if (key == "modes") spec.modes = parse_modes(value);
    else if (key == "sweep.K") spec.ues = parse_int_list(key, value);
    else if (key == "sweep.L") spec.clusters = parse_int_list(key, value);
    else if (key == "sweep.velocity_kmh") spec.velocities = parse_double_list(key, value);
    else if (key == "sweep.tau_c") spec.block_lengths = parse_int_list(key, value);
    else if (key.rfind("sweep.", 0) == 0) throw ConfigError("unknown sweep axis '" + key + "'");
    else rest.emplace(key, value);
  }
  apply_key_values(spec.base, rest);
  if (values.count("mode") && !values.count("modes") && spec.preset == "custom") spec.modes = {spec.base.mode};
}

void validate(const SweepSpec& spec) {
  if (spec.modes.empty()) throw ConfigError("a sweep needs at least one mode");
  require_increasing(spec.ues, "K");
  require_increasing(spec.clusters, "L");
  require_increasing(spec.velocities, "velocity_kmh");
  require_increasing(spec.block_lengths, "tau_c");
  const Axes axes = resolved_axes(spec);
  for (Mode mode : axes.modes) {
    for (int k : axes.ues) {
      for (int l : axes.clusters) {
        for (double v : axes.velocities) {
          for (int tau_c : axes.block_lengths) {
            SimConfig c = point_config(spec, mode, k, l, v);
            c.tau_c = tau_c;
            try {
              validate(c);
            } catch (const ConfigError& e) {
              throw ConfigError("sweep point (mode " + to_string(mode) + ", K " + std::to_string(k) + ", L " +
                                std::to_string(l) + ", tau_c " + std::to_string(tau_c) + "): " + e.what());
            }
          }
        }
      }
    }
  }
}

std::vector<SweepPoint> run_sweep(const SweepSpec& spec, const SimOptions& options, const ProgressFn& progress) {
  validate(spec);
  const Axes axes = resolved_axes(spec);
  std::vector<SweepPoint> points;
  for (Mode mode : axes.modes) {
    for (int k : axes.ues) {
      for (int l : axes.clusters) {
        for (double v : axes.velocities) {
          const SimConfig c = point_config(spec, mode, k, l, v);
          if (progress) {
            progress("mode " + to_string(mode) + ", K " + std::to_string(k) + ", L " + std::to_string(l) +
                     ", v " + format_number(v) + " km/h");
          }
          std::vector<SeReport> reports = ergodic_se_block_lengths(c, axes.block_lengths, options);
          for (std::size_t i = 0; i < reports.size(); ++i) {
            points.push_back({mode, k, l, v, axes.block_lengths[i], std::move(reports[i])});
          }
        }
      }
    }
  }
  std::sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return std::make_tuple(to_string(a.mode), a.ues, a.clusters, a.velocity_kmh, a.tau_c) <
           std::make_tuple(to_string(b.mode), b.ues, b.clusters, b.velocity_kmh, b.tau_c);
  });
  return points;
}

std::string results_csv(const std::vector<SweepPoint>& points) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const SweepPoint& p : points) {
    const SeReport& r = p.report;
    out += to_string(p.mode) + "," + std::to_string(p.ues) + "," + std::to_string(p.clusters) + "," +
           format_number(p.velocity_kmh) + "," + std::to_string(p.tau_c) + "," + format_number(r.sum.mean) + "," +
           format_number(r.sum.std_error) + "," + format_number(r.common.mean) + "," +
           format_number(r.common.std_error) + "," + format_number(r.priv.mean) + "," +
           format_number(r.priv.std_error) + "," + std::to_string(r.drops) + "," + std::to_string(r.realizations) +
           "\n";
  }
  return out;
}

std::string run_manifest_json(const SweepSpec& spec, const std::vector<SweepPoint>& points, const RunInfo& info) {
  nlohmann::ordered_json j;
  j["version"] = info.version;
  j["preset"] = spec.preset;
  j["seed"] = spec.base.seed;
  j["drops"] = spec.base.drops;
  j["realizations"] = spec.base.realizations;
  j["threads"] = info.threads;
  j["stats_source"] = to_string(info.options.stats_source);
  if (info.options.stats_source == StatsSource::kMonteCarlo) j["stats_samples"] = info.options.stats_samples;
  if (info.options.verify_samples > 0) {
    j["verify_samples"] = info.options.verify_samples;
    j["verify_tolerance"] = info.options.verify_tolerance;
  }
  j["wall_time_s"] = info.wall_time_s;
  j["base_config"] = to_key_value_text(spec.base);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const SweepPoint& p : points) {
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(p.report.config_hash));
    nlohmann::ordered_json e;
    e["mode"] = to_string(p.mode);
    e["K"] = p.ues;
    e["L"] = p.clusters;
    e["velocity_kmh"] = p.velocity_kmh;
    e["tau_c"] = p.tau_c;
    e["lambda"] = p.report.lambda;
    e["config_hash"] = hash;
    if (info.options.verify_samples > 0) e["worst_stats_deviation"] = p.report.stats_deviation;
    arr.push_back(e);
  }
  j["points"] = arr;
  return j.dump(2) + "\n";
}

std::string sweep_plot_svg(const SweepSpec& spec, const std::vector<SweepPoint>& points) {
  const Axes axes = resolved_axes(spec);
  enum Axis { kK, kL, kV, kTau };
  const std::size_t sizes[] = {axes.ues.size(), axes.clusters.size(), axes.velocities.size(),
                               axes.block_lengths.size()};
  int x_axis = kK;
  for (int a = 1; a < 4; ++a) {
    if (sizes[a] > sizes[x_axis]) x_axis = a;
  }
  const char* names[] = {"K", "L", "v", "tau_c"};
  const char* x_labels[] = {"number of UEs K", "number of clusters L", "UE velocity (km/h)",
                            "resource block length tau_c"};

  auto x_of = [&](const SweepPoint& p) {
    switch (x_axis) {
      case kK: return static_cast<double>(p.ues);
      case kL: return static_cast<double>(p.clusters);
      case kV: return p.velocity_kmh;
      default: return static_cast<double>(p.tau_c);
    }
  };
  auto label_of = [&](const SweepPoint& p) {
    std::string label = to_string(p.mode);
    if (x_axis != kK && sizes[kK] > 1) label += std::string(", ") + names[kK] + "=" + std::to_string(p.ues);
    if (x_axis != kL && sizes[kL] > 1) label += std::string(", ") + names[kL] + "=" + std::to_string(p.clusters);
    if (x_axis != kV && sizes[kV] > 1) label += std::string(", ") + names[kV] + "=" + format_number(p.velocity_kmh);
    if (x_axis != kTau && sizes[kTau] > 1) label += std::string(", ") + names[kTau] + "=" + std::to_string(p.tau_c);
    return label;
  };

  LinePlot plot;
  plot.title = "Sum SE (" + spec.preset + ")";
  plot.x_label = x_labels[x_axis];
  plot.y_label = "sum SE (bit/s/Hz)";
  std::map<std::string, std::size_t> index;
  for (const SweepPoint& p : points) {
    const std::string label = label_of(p);
    auto it = index.find(label);
    if (it == index.end()) {
      it = index.emplace(label, plot.series.size()).first;
      plot.series.push_back({label, {}, {}, {}});
    }
    PlotSeries& s = plot.series[it->second];
    s.x.push_back(x_of(p));
    s.y.push_back(p.report.sum.mean);
    s.err.push_back(p.report.sum.std_error);
  }
  for (PlotSeries& s : plot.series) {
    std::vector<std::size_t> order(s.x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
    PlotSeries sorted{s.label, {}, {}, {}};
    for (std::size_t i : order) {
      sorted.x.push_back(s.x[i]);
      sorted.y.push_back(s.y[i]);
      sorted.err.push_back(s.err[i]);
    }
    s = std::move(sorted);
  }
  return render_svg(plot);
}

}  // namespace cfrsma
