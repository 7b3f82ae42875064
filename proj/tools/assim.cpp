// Copyright 2026 The assim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for the benchmark harness.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "assim/bench.hpp"
#include "assim/config.hpp"
#include "assim/error.hpp"
#include "assim/version.hpp"

namespace {

assim::ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  assim::Config cfg = assim::Config::load(path);
  for (const auto& o : overrides) cfg.apply_assignment(o);
  return assim::experiment_config(cfg);
}

void print_info() {
  std::cout << "assim " << assim::kVersion << "\n\nConfiguration keys (key = value, '#' comments):\n";
  std::size_t width = 0;
  for (const auto& k : assim::config_schema()) width = std::max(width, k.key.size());
  for (const auto& k : assim::config_schema()) {
    std::printf("  %-*s  %-9s  %s\n", static_cast<int>(width), k.key.c_str(), k.type.c_str(),
                k.doc.c_str());
  }
  for (auto e : {assim::Experiment::kExample1, assim::Experiment::kExample2,
                 assim::Experiment::kExample3Analog}) {
    std::cout << "\nDefaults for experiment = " << assim::to_string(e) << ":\n";
    for (const auto& [key, value] : assim::resolved_entries(assim::default_config(e))) {
      std::printf("  %-*s = %s\n", static_cast<int>(width), key.c_str(), value.c_str());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-basis state estimation benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "Override a key: key=value (repeatable)");
  run->add_option("--out", out_dir, "Output directory")->required();

  std::string decay_out;
  auto* decay = app.add_subcommand("pod-decay", "Print the POD decay table of a config");
  decay->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  decay->add_option("--set", overrides, "Override a key: key=value (repeatable)");
  decay->add_option("--out", decay_out, "Write pod_decay.csv into this directory instead");

  app.add_subcommand("info", "Print the configuration schema and defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("info")) {
      print_info();
      return 0;
    }
    const assim::ExperimentConfig cfg = load(config_path, overrides);
    if (run->parsed()) {
      const assim::RunResult result = assim::run_experiment(cfg);
      const auto files = assim::write_outputs(out_dir, cfg, result);
      std::cout << "wrote";
      for (const auto& f : files) std::cout << ' ' << f;
      std::cout << " to " << out_dir << '\n';
      for (const auto& a : result.aggregates) {
        std::printf("%-6s n=%-3d m=%-3d alpha=%-6g sigma=%-6g mean=%.4f max=%.4f\n",
                    a.method.c_str(), a.n, a.m, a.alpha, a.sigma, a.mean, a.max);
      }
      return 0;
    }
    const auto rows = assim::pod_decay(cfg);
    if (!decay_out.empty()) {
      std::filesystem::create_directories(decay_out);
      std::ofstream out(std::filesystem::path(decay_out) / "pod_decay.csv");
      assim::write_pod_decay_csv(out, rows);
    } else {
      assim::write_pod_decay_csv(std::cout, rows);
    }
    return 0;
  } catch (const assim::ConfigError& e) {
    std::cerr << "config error: " << (config_path.empty() ? "" : config_path + ": ") << e.what()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
