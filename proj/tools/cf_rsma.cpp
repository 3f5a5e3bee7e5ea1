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

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "cfrsma/experiment.hpp"

namespace {

using namespace cfrsma;

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("CF_RSMA_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("CF_RSMA_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo spectral-efficiency simulator for clustered cell-free RSMA with channel aging"};
  std::string preset;
  std::string config_path;
  std::string output_dir = "results";
  std::uint64_t seed = 0;
  int drops = 0;
  int realizations = 0;
  std::string modes;
  bool plot = false;
  int threads = 0;
  int verify_samples = 0;
  double verify_tolerance = 0.02;
  std::string stats_source = "closed_form";
  int stats_samples = 100000;

  app.add_option("--preset", preset, "fig_a, fig_b, fig_c or custom (default: custom, or the config's preset key)");
  app.add_option("--config", config_path, "key-value config file (schema_version = 1)");
  app.add_option("--output", output_dir, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* drops_opt = app.add_option("--drops", drops, "network drops per point")->check(CLI::PositiveNumber);
  auto* real_opt =
      app.add_option("--realizations", realizations, "channel realizations per drop")->check(CLI::PositiveNumber);
  app.add_option("--modes", modes, "comma list of rsma_dl_pilots, rsma_no_dl_pilots, sdma");
  app.add_option("--plot", plot, "also write an SVG plot (true/false)");
  app.add_option("--threads", threads, "worker threads (fallback: CF_RSMA_THREADS, then all cores)");
  app.add_option("--verify-stats", verify_samples,
                 "cross-check closed-form statistics against N sampled realizations per drop");
  app.add_option("--verify-tolerance", verify_tolerance, "relative tolerance of --verify-stats")->capture_default_str();
  app.add_option("--stats-source", stats_source, "closed_form or monte_carlo")->capture_default_str();
  app.add_option("--stats-samples", stats_samples, "samples per drop for --stats-source monte_carlo")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    KeyValues file_values;
    if (!config_path.empty()) file_values = parse_key_values(read_file(config_path));
    if (preset.empty()) {
      const auto it = file_values.find("preset");
      preset = it != file_values.end() ? it->second : "custom";
    }
    SweepSpec spec = preset_sweep(preset);
    apply_sweep_keys(spec, file_values);
    if (*seed_opt) spec.base.seed = seed;
    if (*drops_opt) spec.base.drops = drops;
    if (*real_opt) spec.base.realizations = realizations;
    if (!modes.empty()) {
      KeyValues m{{"modes", modes}};
      apply_sweep_keys(spec, m);
    }

    SimOptions options;
    options.threads = resolve_threads(threads);
    options.stats_source = stats_source_from_string(stats_source);
    options.stats_samples = stats_samples;
    options.verify_samples = verify_samples;
    options.verify_tolerance = verify_tolerance;
    if (verify_samples < 0 || stats_samples < 2 || !(verify_tolerance > 0.0)) {
      throw ConfigError("--verify-stats must be >= 0, --stats-samples >= 2 and --verify-tolerance > 0");
    }
    validate(spec);

    const auto start = std::chrono::steady_clock::now();
    const auto points = run_sweep(spec, options, [](const std::string& msg) { std::cerr << "[run] " << msg << "\n"; });
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::filesystem::path dir(output_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "results.csv", results_csv(points));
    RunInfo info{CFRSMA_VERSION, options.threads, wall, options};
    write_file(dir / "meta.json", run_manifest_json(spec, points, info));
    if (plot) write_file(dir / (spec.preset + ".svg"), sweep_plot_svg(spec, points));
    std::cerr << "[run] wrote " << (dir / "results.csv").string() << " (" << points.size() << " rows, "
              << wall << " s)\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const StatisticsError& e) {
    std::cerr << "statistics error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
