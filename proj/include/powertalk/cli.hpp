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
#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace powertalk::cli {

/// Exit codes: 0 clean, 1 runtime invariant violation, 2 config error
/// (diagnostic names the offending field).
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Runs one scenario and writes events.log, metrics.txt, trace_voltage.csv
/// and trace_currents.csv under `out_dir`.
int cmd_run(const std::string& config_path,
            std::optional<std::uint64_t> seed_override,
            const std::string& out_dir);

/// Parses and validates a scenario config; prints OK or the diagnostic.
int cmd_validate(const std::string& config_path);

int cmd_ber_sweep(const std::string& sweep_path, const std::string& out_csv,
                  int workers, std::optional<std::uint64_t> trials_override,
                  std::optional<std::uint64_t> seed_override);

int cmd_mu_sweep(const std::string& sweep_path, const std::string& out_csv,
                 int workers, std::optional<std::uint64_t> trials_override,
                 std::optional<std::uint64_t> seed_override);

}  // namespace powertalk::cli
