/*
 * Copyright 2026 the powertalk authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <CLI11.hpp>
#include <optional>
#include <string>
#include <thread>

#include "powertalk/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Power talk DER authentication simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  int workers = static_cast<int>(
      std::max(1u, std::thread::hardware_concurrency()));

  CLI::App* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("--config", config_path, "Scenario config (JSON)")
      ->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out, "Output directory");

  CLI::App* validate =
      app.add_subcommand("validate", "Check a scenario config only");
  validate->add_option("--config", config_path, "Scenario config (JSON)")
      ->required();

  CLI::App* ber = app.add_subcommand(
      "ber-sweep", "Bit error rate over a (gamma, t_pt) grid");
  ber->add_option("--config", config_path, "Sweep spec (JSON)")->required();
  ber->add_option("--out", out, "Output CSV path ('-' for stdout)");
  ber->add_option("--workers", workers, "Worker threads");
  ber->add_option("--trials", trials, "Monte Carlo trials per point");
  ber->add_option("--seed", seed, "Override the sweep seed");

  CLI::App* mu = app.add_subcommand(
      "mu-sweep", "Handshake completion time over a (lambda, M) grid");
  mu->add_option("--config", config_path, "Sweep spec (JSON)")->required();
  mu->add_option("--out", out, "Output CSV path ('-' for stdout)");
  mu->add_option("--workers", workers, "Worker threads");
  mu->add_option("--trials", trials, "Simulated runs per point");
  mu->add_option("--seed", seed, "Override the sweep seed");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return powertalk::cli::cmd_run(config_path, seed, out);
  }
  if (validate->parsed()) {
    return powertalk::cli::cmd_validate(config_path);
  }
  if (ber->parsed()) {
    return powertalk::cli::cmd_ber_sweep(config_path, out, workers, trials,
                                         seed);
  }
  return powertalk::cli::cmd_mu_sweep(config_path, out, workers, trials, seed);
}
