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
#include <vector>

#include "powertalk/event_log.hpp"
#include "powertalk/scenario.hpp"

namespace powertalk::sim {

struct RunMetrics {
  bool handshake_attempted = false;
  bool handshake_completed = false;
  bool handshake_failed = false;
  std::string failure_reason;
  std::optional<std::uint64_t> access_slot;
  std::optional<std::uint64_t> completion_slot;
  std::optional<double> completion_time_s;  // from PTARCh access to complete
  std::uint64_t bit_errors = 0;
  std::uint64_t load_changes = 0;
  std::uint64_t recalibrations = 0;
  std::uint64_t window_extension_slots = 0;
  std::uint64_t attempts = 0;
  bool cc_keys_installed = false;
  bool sta_keys_installed = false;

  // Sampled once per secondary period.
  std::vector<double> trace_t_s;
  std::vector<double> trace_v_bus;
  std::vector<int> trace_unit_ids;
  std::vector<std::vector<double>> trace_currents;  // row per sample

  std::string summary() const;
};

struct RunResult {
  EventLog log;
  RunMetrics metrics;
};

/// Slot-by-slot co-simulation of one scenario. `record_detail` controls the
/// per-slot bit records and steady-state snapshots in the event log; the
/// simulated behaviour is identical either way.
RunResult run(const ScenarioConfig& config, bool record_detail = true);

struct MuEstimate {
  double mean_s = 0.0;
  double stderr_s = 0.0;
  std::uint64_t completed = 0;
  std::uint64_t runs = 0;
  std::vector<double> completion_times_s;  // completed runs, in run order
};

/// Empirical mean handshake completion time over independent seeded runs of
/// `config` (sub-seed k derived from `seed` and k). Results are merged in run
/// order, so the estimate does not depend on the worker count.
MuEstimate estimate_mu(const ScenarioConfig& config, std::uint64_t n_runs,
                       std::uint64_t seed, int workers = 1);

}  // namespace powertalk::sim
