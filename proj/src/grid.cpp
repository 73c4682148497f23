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
#include "powertalk/grid.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "powertalk/errors.hpp"

namespace powertalk::grid {

namespace {

void check_parameters(std::span<const DerUnit> units, const LoadModel& load) {
  if (!(load.r_load > 0.0)) {
    throw NonPositiveResistanceError("r_load must be positive");
  }
  bool any_vsc = false;
  for (const DerUnit& u : units) {
    if (u.r_line < 0.0 || !std::isfinite(u.r_line)) {
      throw NonPositiveResistanceError("r_line must be >= 0 for unit " +
                                       std::to_string(u.id));
    }
    if (u.mode == Mode::kVsc) {
      any_vsc = true;
      if (!(u.r > 0.0)) {
        throw NonPositiveResistanceError("virtual resistance must be > 0 for unit " +
                                         std::to_string(u.id));
      }
      if (!(u.x > 0.0)) {
        throw NonPositiveResistanceError("reference voltage must be > 0 for unit " +
                                         std::to_string(u.id));
      }
    }
  }
  if (!any_vsc) {
    throw NoVoltageSourceError("no VSC unit present; bus voltage undefined");
  }
}

double offset_for(Offsets offsets, std::size_t k) {
  return offsets.empty() ? 0.0 : offsets[k];
}

}  // namespace

GridSteadyState solve_steady_state(std::span<const DerUnit> units,
                                   const LoadModel& load, Offsets offsets) {
  check_parameters(units, load);

  const double load_conductance =
      std::isinf(load.r_load) ? 0.0 : 1.0 / load.r_load;

  double sum_g = 0.0;
  double sum_source = 0.0;  // sum g*e over VSCs plus CSC injections
  for (std::size_t k = 0; k < units.size(); ++k) {
    const DerUnit& u = units[k];
    if (u.mode == Mode::kVsc) {
      const double g = 1.0 / (u.r + u.r_line);
      sum_g += g;
      sum_source += g * (u.x + u.gamma_offset + offset_for(offsets, k));
    } else {
      sum_source += u.i_csc;
    }
  }

  GridSteadyState state;
  state.v_bus = sum_source / (load_conductance + sum_g);
  state.v.resize(units.size());
  state.i.resize(units.size());
  for (std::size_t k = 0; k < units.size(); ++k) {
    const DerUnit& u = units[k];
    if (u.mode == Mode::kVsc) {
      const double e = u.x + u.gamma_offset + offset_for(offsets, k);
      state.i[k] = (e - state.v_bus) / (u.r + u.r_line);
    } else {
      state.i[k] = u.i_csc;
    }
    state.v[k] = state.v_bus + u.r_line * state.i[k];
  }
  return state;
}

GridSteadyState solve_steady_state_dense(std::span<const DerUnit> units,
                                         const LoadModel& load,
                                         Offsets offsets) {
  check_parameters(units, load);

  // Unknowns: [v_bus, i_0..i_{n-1}, v_0..v_{n-1}].
  const std::size_t n = units.size();
  const Eigen::Index dim = static_cast<Eigen::Index>(2 * n + 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);

  const double load_conductance =
      std::isinf(load.r_load) ? 0.0 : 1.0 / load.r_load;

  // KCL at the bus: sum i_k - v_bus/r_load = 0.
  a(0, 0) = -load_conductance;
  for (std::size_t k = 0; k < n; ++k) {
    a(0, 1 + static_cast<Eigen::Index>(k)) = 1.0;
  }

  for (std::size_t k = 0; k < n; ++k) {
    const DerUnit& u = units[k];
    const Eigen::Index ik = 1 + static_cast<Eigen::Index>(k);
    const Eigen::Index vk = 1 + static_cast<Eigen::Index>(n + k);
    const Eigen::Index row_src = ik;   // source law
    const Eigen::Index row_line = vk;  // line drop

    if (u.mode == Mode::kVsc) {
      // v_k + r*i_k = x + gamma + offset
      a(row_src, vk) = 1.0;
      a(row_src, ik) = u.r;
      b(row_src) = u.x + u.gamma_offset + offset_for(offsets, k);
    } else {
      // i_k = i_csc
      a(row_src, ik) = 1.0;
      b(row_src) = u.i_csc;
    }
    // v_k - v_bus - r_line*i_k = 0
    a(row_line, vk) = 1.0;
    a(row_line, 0) = -1.0;
    a(row_line, ik) = -u.r_line;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    throw SingularSystemError("nodal admittance system is singular");
  }
  const Eigen::VectorXd z = lu.solve(b);

  GridSteadyState state;
  state.v_bus = z(0);
  state.v.resize(n);
  state.i.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    state.i[k] = z(1 + static_cast<Eigen::Index>(k));
    state.v[k] = z(1 + static_cast<Eigen::Index>(n + k));
  }
  return state;
}

DeviationReport voltage_deviation(std::span<const DerUnit> units,
                                  const LoadModel& load, Offsets offsets,
                                  int tx_id, double gamma) {
  std::vector<DerUnit> work(units.begin(), units.end());
  std::size_t tx_index = units.size();
  for (std::size_t k = 0; k < work.size(); ++k) {
    if (work[k].id == tx_id) {
      tx_index = k;
      break;
    }
  }
  if (tx_index == units.size() || work[tx_index].mode != Mode::kVsc) {
    throw NoVoltageSourceError("power talk transmitter must be a VSC unit");
  }

  work[tx_index].gamma_offset = 0.0;
  const GridSteadyState base = solve_steady_state(work, load, offsets);
  work[tx_index].gamma_offset = -gamma;
  const GridSteadyState low = solve_steady_state(work, load, offsets);
  work[tx_index].gamma_offset = +gamma;
  const GridSteadyState high = solve_steady_state(work, load, offsets);

  DeviationReport report;
  report.dv_bus_bit0 = std::abs(low.v_bus - base.v_bus);
  report.dv_bus_bit1 = std::abs(high.v_bus - base.v_bus);
  for (std::size_t k = 0; k < work.size(); ++k) {
    if (k == tx_index) continue;
    report.receivers.push_back({work[k].id, std::abs(low.v[k] - base.v[k]),
                                std::abs(high.v[k] - base.v[k])});
  }
  return report;
}

double kcl_residual(const GridSteadyState& state, const LoadModel& load) {
  double sum_i = 0.0;
  for (double i : state.i) sum_i += i;
  const double load_current =
      std::isinf(load.r_load) ? 0.0 : state.v_bus / load.r_load;
  return std::abs(sum_i - load_current);
}

}  // namespace powertalk::grid
