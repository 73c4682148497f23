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
#include <span>
#include <vector>

namespace powertalk::grid {

enum class Mode { kVsc, kCsc };

/// One converter-interfaced unit on the bus.
///
/// VSC units regulate through the droop law v = x - r*i (plus correction
/// offsets), CSC units inject a fixed current. `gamma_offset` is the power
/// talk deviation currently applied to the reference voltage: +-gamma while
/// the unit transmits a bit, 0 otherwise.
struct DerUnit {
  int id = 0;
  Mode mode = Mode::kVsc;
  double x = 48.0;       // reference voltage [V]
  double r = 0.2;        // virtual resistance [ohm]
  double r_line = 0.2;   // distribution line resistance to the bus [ohm]
  double i_csc = 0.0;    // injected current in CSC mode [A]
  double gamma_offset = 0.0;  // power talk deviation in {-gamma, 0, +gamma} [V]
};

/// Aggregate resistive load on the bus. r_load = +inf models an open bus.
struct LoadModel {
  double r_load = 1.5;  // [ohm]
};

/// Solved operating point at one instant.
struct GridSteadyState {
  double v_bus = 0.0;      // bus voltage [V]
  std::vector<double> v;   // per-unit output terminal voltage [V]
  std::vector<double> i;   // per-unit output current [A]
};

/// Per-unit reference-voltage corrections from the secondary controller.
/// delta[k] applies to units[k]; an empty span means all zeros.
using Offsets = std::span<const double>;

/// Closed-form solution of the single-bus star network.
///
/// Each VSC contributes conductance g = 1/(r + r_line) with source
/// e = x + gamma_offset + offset; each CSC injects i_csc. The bus voltage is
///   v_bus = (sum g*e + sum i_csc) / (1/r_load + sum g)
/// and the per-unit currents/voltages are back-substituted.
GridSteadyState solve_steady_state(std::span<const DerUnit> units,
                                   const LoadModel& load,
                                   Offsets offsets = {});

/// Independent oracle: assembles the full nodal system (bus voltage, per-unit
/// terminal voltages and currents) and solves it with a generic dense LU.
/// Used to cross-check solve_steady_state; not called on the simulation path.
GridSteadyState solve_steady_state_dense(std::span<const DerUnit> units,
                                         const LoadModel& load,
                                         Offsets offsets = {});

/// Output-voltage deviation one receiver sees when `tx_id` applies +-gamma.
struct ReceiverDeviation {
  int unit_id = 0;
  double dv_bit0 = 0.0;  // |v_j(-gamma) - v_j(0)| [V]
  double dv_bit1 = 0.0;  // |v_j(+gamma) - v_j(0)| [V]
};

/// Deviations of every receiver j != tx_id (and of the bus itself) caused by
/// the transmitter's +-gamma reference deviation, from paired solves.
struct DeviationReport {
  std::vector<ReceiverDeviation> receivers;
  double dv_bus_bit0 = 0.0;
  double dv_bus_bit1 = 0.0;
};

DeviationReport voltage_deviation(std::span<const DerUnit> units,
                                  const LoadModel& load, Offsets offsets,
                                  int tx_id, double gamma);

/// Largest KCL residual |sum i - v_bus/r_load| of a solved state, for
/// invariant checks.
double kcl_residual(const GridSteadyState& state, const LoadModel& load);

}  // namespace powertalk::grid
