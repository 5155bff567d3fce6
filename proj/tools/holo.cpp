// Copyright 2026 The holo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// holo run <config.json> [--out DIR] [--parallel N] [--seed S]
// holo validate <config.json>

#include <CLI11.hpp>

#include <iostream>

#include "holo/harness.hpp"

namespace h = holo::harness;

int main(int argc, char** argv) {
  CLI::App app{"Holonomic gate and tunable-coupler simulations"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out;
  int parallel = 1;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run an experiment config and write <name>.csv and <name>.manifest.json");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("--out", out, "Output directory (overrides the config)");
  run->add_option("--parallel", parallel, "Worker threads for sweep rows")->check(CLI::Range(1, 1024));
  run->add_option("--seed", seed, "Seed recorded with the run (overrides the config)");

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << h::error_line(h::ExitCode::invalid, "usage", e.what()) << '\n';
    return h::ExitCode::invalid;
  }

  try {
    const h::Logger log(h::log_level_from_env());
    h::ExperimentConfig cfg = h::load_config(config);
    if (validate->parsed()) {
      std::cout << "ok " << h::kind_name(cfg.kind) << ' ' << cfg.name << '\n';
      return h::ExitCode::ok;
    }
    const h::RunResult r = h::run(std::move(cfg), {out, parallel, seed}, log);
    if (r.exit_code != h::ExitCode::ok) {
      std::cerr << h::error_line(r.exit_code, "numerical",
                                 holo::detail::concat(r.failed, " of ", r.rows, " rows failed; see ", r.csv.string()))
                << '\n';
    }
    return r.exit_code;
  } catch (const h::validation_error& e) {
    std::cerr << h::error_line(h::ExitCode::invalid, "validation", e.what()) << '\n';
    return h::ExitCode::invalid;
  } catch (const h::io_error& e) {
    std::cerr << h::error_line(h::ExitCode::io, "io", e.what()) << '\n';
    return h::ExitCode::io;
  } catch (const std::invalid_argument& e) {
    std::cerr << h::error_line(h::ExitCode::invalid, "validation", e.what()) << '\n';
    return h::ExitCode::invalid;
  } catch (const std::exception& e) {
    std::cerr << h::error_line(h::ExitCode::numerical, "numerical", e.what()) << '\n';
    return h::ExitCode::numerical;
  }
}
