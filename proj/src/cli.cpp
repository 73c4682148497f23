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
#include "powertalk/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "powertalk/errors.hpp"
#include "powertalk/event_log.hpp"
#include "powertalk/sim.hpp"
#include "powertalk/sweep.hpp"

namespace powertalk::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + path.string() + "'");
  }
  out << text;
}

std::string voltage_csv(const sim::RunMetrics& m) {
  std::string csv = "t_s,v_bus\n";
  for (std::size_t k = 0; k < m.trace_t_s.size(); ++k) {
    csv += sim::fmt_g17(m.trace_t_s[k]) + "," + sim::fmt_g17(m.trace_v_bus[k]) +
           "\n";
  }
  return csv;
}

std::string currents_csv(const sim::RunMetrics& m) {
  std::string csv = "t_s";
  for (int id : m.trace_unit_ids) csv += ",i_" + std::to_string(id);
  csv += "\n";
  for (std::size_t k = 0; k < m.trace_t_s.size(); ++k) {
    csv += sim::fmt_g17(m.trace_t_s[k]);
    for (double i : m.trace_currents[k]) csv += "," + sim::fmt_g17(i);
    csv += "\n";
  }
  return csv;
}

}  // namespace

int cmd_run(const std::string& config_path,
            std::optional<std::uint64_t> seed_override,
            const std::string& out_dir) {
  sim::ScenarioConfig cfg;
  try {
    cfg = sim::ScenarioConfig::load_file(config_path);
    if (seed_override) {
      cfg.seed = *seed_override;
      cfg.validate();
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const sim::RunResult result = sim::run(cfg);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "events.log", result.log.to_string());
    write_file(dir / "metrics.txt", result.metrics.summary());
    write_file(dir / "trace_voltage.csv", voltage_csv(result.metrics));
    write_file(dir / "trace_currents.csv", currents_csv(result.metrics));
    std::cout << result.metrics.summary();
    return kExitOk;
  } catch (const InvariantViolationError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_validate(const std::string& config_path) {
  try {
    sim::ScenarioConfig::load_file(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::cout << "OK\n";
  return kExitOk;
}

namespace {

int run_sweep(const std::string& sweep_path, const std::string& out_csv,
              int workers, std::optional<std::uint64_t> trials_override,
              std::optional<std::uint64_t> seed_override, bool ber) {
  sim::SweepSpec spec;
  try {
    spec = sim::SweepSpec::load_file(sweep_path);
    if (trials_override) spec.trials = *trials_override;
    if (seed_override) spec.seed = *seed_override;
    if (ber) {
      spec.validate_for_ber();
    } else {
      spec.validate_for_mu();
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const std::string csv =
        ber ? sim::ber_rows_to_csv(sim::run_ber_sweep(spec, workers))
            : sim::mu_rows_to_csv(sim::run_mu_sweep(spec, workers));
    if (out_csv == "-") {
      std::cout << csv;
    } else {
      const std::filesystem::path path(out_csv);
      if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
      }
      write_file(path, csv);
      std::cout << "wrote " << out_csv << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int cmd_ber_sweep(const std::string& sweep_path, const std::string& out_csv,
                  int workers, std::optional<std::uint64_t> trials_override,
                  std::optional<std::uint64_t> seed_override) {
  return run_sweep(sweep_path, out_csv, workers, trials_override,
                   seed_override, /*ber=*/true);
}

int cmd_mu_sweep(const std::string& sweep_path, const std::string& out_csv,
                 int workers, std::optional<std::uint64_t> trials_override,
                 std::optional<std::uint64_t> seed_override) {
  return run_sweep(sweep_path, out_csv, workers, trials_override,
                   seed_override, /*ber=*/false);
}

}  // namespace powertalk::cli
