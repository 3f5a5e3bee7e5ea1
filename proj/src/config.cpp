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

#include "cfrsma/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cfrsma {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + value + "'");
  }
  return out;
}

int parse_count(const std::string& key, const std::string& value) {
  const auto v = parse_int(key, value);
  if (v < 0 || v > 1'000'000'000) throw ConfigError("config key '" + key + "' out of range: " + value);
  return static_cast<int>(v);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kRsmaDlPilots:
      return "rsma_dl_pilots";
    case Mode::kRsmaNoDlPilots:
      return "rsma_no_dl_pilots";
    case Mode::kSdma:
      return "sdma";
  }
  return "unknown";
}

Mode mode_from_string(std::string_view text) {
  const std::string t = trim(text);
  if (t == "rsma_dl_pilots" || t == "RSMA_DL_PILOTS") return Mode::kRsmaDlPilots;
  if (t == "rsma_no_dl_pilots" || t == "RSMA_NO_DL_PILOTS") return Mode::kRsmaNoDlPilots;
  if (t == "sdma" || t == "SDMA") return Mode::kSdma;
  throw ConfigError("unknown mode '" + t + "' (expected rsma_dl_pilots, rsma_no_dl_pilots or sdma)");
}

double SimConfig::velocity_of(int ue) const {
  if (velocity_kmh.size() == 1) return velocity_kmh.front();
  return velocity_kmh.at(static_cast<std::size_t>(ue));
}

double SimConfig::effective_power_split() const {
  return mode == Mode::kSdma ? 1.0 : power_split;
}

int max_cluster_size(int num_ues, int num_clusters) {
  return (num_ues + num_clusters - 1) / num_clusters;
}

void validate(const SimConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.area_side_m > 0.0, "area_side_m must be positive");
  require(c.ap_height_m >= 0.0, "ap_height_m must be non-negative");
  require(c.num_aps >= 1, "num_aps (M) must be >= 1");
  require(c.antennas_per_ap >= 1, "antennas_per_ap (N) must be >= 1");
  require(c.num_ues >= 1, "num_ues (K) must be >= 1");
  require(c.num_clusters >= 1, "num_clusters (L) must be >= 1");
  require(c.num_clusters <= c.num_aps && c.num_clusters <= c.num_ues,
          "num_clusters (L) must not exceed min(M, K)");
  require(c.tau_c >= 1, "tau_c must be >= 1");
  require(c.power_split >= 0.0 && c.power_split <= 1.0, "power_split (t_m) must lie in [0, 1]");
  require(c.asd_deg >= 0.0, "asd_deg must be non-negative");
  require(!c.velocity_kmh.empty(), "velocity_kmh needs at least one value");
  require(c.velocity_kmh.size() == 1 || c.velocity_kmh.size() == static_cast<std::size_t>(c.num_ues),
          "velocity_kmh must hold one value or one value per UE");
  for (double v : c.velocity_kmh) require(v >= 0.0, "velocity_kmh must be non-negative");
  require(c.carrier_hz > 0.0, "carrier_hz must be positive");
  require(c.sample_time_s > 0.0, "sample_time_s must be positive");
  require(c.bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  require(c.drops >= 1, "drops must be >= 1 (zero trials)");
  require(c.realizations >= 1, "realizations must be >= 1 (zero trials)");
  require(std::isfinite(c.noise_dbm) && std::isfinite(c.p_max_dbm) && std::isfinite(c.ul_pilot_dbm),
          "powers must be finite");
  (void)resolve_timing(c);
}

Timing resolve_timing(const SimConfig& c) {
  Timing t;
  t.tau_c = c.tau_c;
  const int needed = max_cluster_size(c.num_ues, c.num_clusters);
  t.tau_u = c.tau_u.value_or(needed);
  if (t.tau_u < needed) {
    throw ConfigError("tau_u = " + std::to_string(t.tau_u) + " violates max_l |K_l| <= tau_u (largest cluster has " +
                      std::to_string(needed) + " UEs)");
  }

  switch (c.mode) {
    case Mode::kRsmaNoDlPilots:
      if (c.tau_dc.value_or(0) != 0 || c.tau_dp.value_or(0) != 0) {
        throw ConfigError("rsma_no_dl_pilots requires tau_dc = tau_dp = 0");
      }
      t.tau_dc = 0;
      t.tau_dp = 0;
      break;
    case Mode::kRsmaDlPilots:
    case Mode::kSdma: {
      const int dc = c.has_common_stream() ? c.num_clusters : 0;
      if (c.tau_dc && *c.tau_dc != dc) {
        throw ConfigError("tau_dc must equal " + std::to_string(dc) + " in mode " + to_string(c.mode) +
                          " (one common pilot per cluster when a common stream is sent)");
      }
      t.tau_dc = dc;
      t.tau_dp = c.tau_dp.value_or(t.tau_u);
      if (t.tau_dp < t.tau_u) {
        throw ConfigError("tau_dp must be >= tau_u so every pilot slot has a DL private pilot");
      }
      break;
    }
  }

  if (t.tau_u + t.tau_d() >= t.tau_c) {
    throw ConfigError("tau_u + tau_dc + tau_dp = " + std::to_string(t.tau_u + t.tau_d()) +
                      " must be < tau_c = " + std::to_string(t.tau_c));
  }
  return t;
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool saw_schema = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!saw_schema) {
      if (key != "schema_version") {
        throw ConfigError("config must start with 'schema_version = " + std::to_string(kConfigSchemaVersion) + "'");
      }
      if (parse_int(key, value) != kConfigSchemaVersion) {
        throw ConfigError("unsupported config schema_version " + value);
      }
      saw_schema = true;
    }
    if (!out.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  if (!saw_schema) throw ConfigError("config is missing schema_version");
  return out;
}

void apply_key_values(SimConfig& c, const KeyValues& values) {
  for (const auto& [key, value] : values) {
    if (key == "schema_version") continue;
    if (key == "area_side_m") c.area_side_m = parse_double(key, value);
    else if (key == "ap_height_m") c.ap_height_m = parse_double(key, value);
    else if (key == "num_aps") c.num_aps = parse_count(key, value);
    else if (key == "antennas_per_ap") c.antennas_per_ap = parse_count(key, value);
    else if (key == "num_ues") c.num_ues = parse_count(key, value);
    else if (key == "num_clusters") c.num_clusters = parse_count(key, value);
    else if (key == "bandwidth_hz") c.bandwidth_hz = parse_double(key, value);
    else if (key == "tau_c") c.tau_c = parse_count(key, value);
    else if (key == "tau_u") c.tau_u = parse_count(key, value);
    else if (key == "tau_dc") c.tau_dc = parse_count(key, value);
    else if (key == "tau_dp") c.tau_dp = parse_count(key, value);
    else if (key == "p_max_dbm") c.p_max_dbm = parse_double(key, value);
    else if (key == "ul_pilot_dbm") c.ul_pilot_dbm = parse_double(key, value);
    else if (key == "noise_dbm") c.noise_dbm = parse_double(key, value);
    else if (key == "power_split") c.power_split = parse_double(key, value);
    else if (key == "asd_deg") c.asd_deg = parse_double(key, value);
    else if (key == "velocity_kmh") {
      c.velocity_kmh.clear();
      std::string item;
      std::istringstream list(value);
      while (std::getline(list, item, ',')) c.velocity_kmh.push_back(parse_double(key, trim(item)));
    } else if (key == "carrier_hz") c.carrier_hz = parse_double(key, value);
    else if (key == "sample_time_s") c.sample_time_s = parse_double(key, value);
    else if (key == "path_loss_intercept_db") c.path_loss.intercept_db = parse_double(key, value);
    else if (key == "path_loss_slope_db") c.path_loss.slope_db = parse_double(key, value);
    else if (key == "rician_intercept") c.rician.intercept = parse_double(key, value);
    else if (key == "rician_slope") c.rician.slope = parse_double(key, value);
    else if (key == "drops") c.drops = parse_count(key, value);
    else if (key == "realizations") c.realizations = parse_count(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "mode") c.mode = mode_from_string(value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

SimConfig parse_config(std::string_view text) {
  SimConfig c;
  apply_key_values(c, parse_key_values(text));
  validate(c);
  return c;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_key_value_text(const SimConfig& c) {
  KeyValues kv;
  kv["area_side_m"] = format_double(c.area_side_m);
  kv["ap_height_m"] = format_double(c.ap_height_m);
  kv["num_aps"] = std::to_string(c.num_aps);
  kv["antennas_per_ap"] = std::to_string(c.antennas_per_ap);
  kv["num_ues"] = std::to_string(c.num_ues);
  kv["num_clusters"] = std::to_string(c.num_clusters);
  kv["bandwidth_hz"] = format_double(c.bandwidth_hz);
  kv["tau_c"] = std::to_string(c.tau_c);
  if (c.tau_u) kv["tau_u"] = std::to_string(*c.tau_u);
  if (c.tau_dc) kv["tau_dc"] = std::to_string(*c.tau_dc);
  if (c.tau_dp) kv["tau_dp"] = std::to_string(*c.tau_dp);
  kv["p_max_dbm"] = format_double(c.p_max_dbm);
  kv["ul_pilot_dbm"] = format_double(c.ul_pilot_dbm);
  kv["noise_dbm"] = format_double(c.noise_dbm);
  kv["power_split"] = format_double(c.power_split);
  kv["asd_deg"] = format_double(c.asd_deg);
  std::string vel;
  for (std::size_t i = 0; i < c.velocity_kmh.size(); ++i) {
    if (i) vel += ",";
    vel += format_double(c.velocity_kmh[i]);
  }
  kv["velocity_kmh"] = vel;
  kv["carrier_hz"] = format_double(c.carrier_hz);
  kv["sample_time_s"] = format_double(c.sample_time_s);
  kv["path_loss_intercept_db"] = format_double(c.path_loss.intercept_db);
  kv["path_loss_slope_db"] = format_double(c.path_loss.slope_db);
  kv["rician_intercept"] = format_double(c.rician.intercept);
  kv["rician_slope"] = format_double(c.rician.slope);
  kv["drops"] = std::to_string(c.drops);
  kv["realizations"] = std::to_string(c.realizations);
  kv["seed"] = std::to_string(c.seed);
  kv["mode"] = to_string(c.mode);

  std::string out = "schema_version = " + std::to_string(kConfigSchemaVersion) + "\n";
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t config_hash(const SimConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_key_value_text(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cfrsma
