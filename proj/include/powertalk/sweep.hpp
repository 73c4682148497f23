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

#include "powertalk/scenario.hpp"

namespace powertalk::sim {

/// One swept parameter: explicit values or a log-spaced range.
struct SweepAxis {
  std::string param;
  std::vector<double> values;
};

/// Declarative parameter sweep over a base scenario. BER sweeps accept the
/// axes {gamma, t_pt_s}; completion-time sweeps accept
/// {lambda_per_slot, m_blank}.
struct SweepSpec {
  ScenarioConfig base;
  std::vector<SweepAxis> axes;  // 1 or 2 axes
  std::uint64_t trials = 1000000;  // MC trials (BER) or runs (mu) per point
  std::uint64_t seed = 1;
  int tx_unit = -1;  // -1 = the configured controller unit
  int rx_unit = -1;  // -1 = first other unit (the incoming one if present)

  static SweepSpec from_json_text(const std::string& text);
  static SweepSpec load_file(const std::string& path);

  void validate_for_ber() const;
  void validate_for_mu() const;
};

struct BerRow {
  double gamma = 0.0;
  double t_pt = 0.0;
  double nu = 0.0;
  double ber_paper = 0.0;
  double ber_standard = 0.0;
  double ber_mc = 0.0;
  double mc_stderr = 0.0;
  std::uint64_t n_trials = 0;
};

struct MuRow {
  double lambda = 0.0;
  std::int64_t m_blank = 0;
  double mu_closed_form = 0.0;
  double mu_empirical = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n_runs = 0;
  std::uint64_t completed = 0;
};

/// Rows in axis-grid order (first axis outer); identical for any worker
/// count, since every point draws from its own derived seed.
std::vector<BerRow> run_ber_sweep(const SweepSpec& spec, int workers = 1);
std::vector<MuRow> run_mu_sweep(const SweepSpec& spec, int workers = 1);

extern const char* kBerCsvHeader;
extern const char* kMuCsvHeader;

std::string ber_rows_to_csv(const std::vector<BerRow>& rows);
std::string mu_rows_to_csv(const std::vector<MuRow>& rows);

}  // namespace powertalk::sim
