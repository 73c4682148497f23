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
#include "powertalk/control.hpp"

#include <cmath>

#include "powertalk/errors.hpp"

namespace powertalk::control {

void SecondaryState::step(const std::vector<SecondaryReport>& reports,
                          double v_ref) {
  if (!enabled_) {
    throw NotEnabledError("secondary control is switched off");
  }
  if (reports.empty()) {
    throw EmptyReportsError("secondary step needs at least one report");
  }

  double mean_v = 0.0;
  double mean_i = 0.0;
  for (const SecondaryReport& r : reports) {
    if (!std::isfinite(r.v_meas) || !std::isfinite(r.i_meas)) {
      throw InvariantViolationError("non-finite secondary report from unit " +
                                    std::to_string(r.unit_id));
    }
    mean_v += r.v_meas;
    mean_i += r.i_meas;
  }
  mean_v /= static_cast<double>(reports.size());
  mean_i /= static_cast<double>(reports.size());

  const double e_v = v_ref - mean_v;
  integ_v_ += e_v;
  delta_x_v_ = gains_.kp_v * e_v + gains_.ki_v * integ_v_;

  for (const SecondaryReport& r : reports) {
    const double e_c = mean_i - r.i_meas;
    double& integ = integ_c_[r.unit_id];
    integ += e_c;
    delta_x_c_[r.unit_id] = gains_.kp_c * e_c + gains_.ki_c * integ;
  }
}

double SecondaryState::apply_offsets(const grid::DerUnit& unit,
                                     bool authenticated) const {
  if (!authenticated || unit.mode != grid::Mode::kVsc) {
    return unit.x;
  }
  return unit.x + delta_x_v_ + delta_x_c(unit.id);
}

void SecondaryState::admit(int unit_id) {
  delta_x_c_.emplace(unit_id, 0.0);
  integ_c_.emplace(unit_id, 0.0);
}

void SecondaryState::evict(int unit_id) {
  delta_x_c_.erase(unit_id);
  integ_c_.erase(unit_id);
}

double SecondaryState::delta_x_c(int unit_id) const {
  auto it = delta_x_c_.find(unit_id);
  return it == delta_x_c_.end() ? 0.0 : it->second;
}

double SecondaryState::delta_x_c_sum() const {
  double sum = 0.0;
  for (const auto& [id, dx] : delta_x_c_) sum += dx;
  return sum;
}

grid::DerUnit mode_switch(const grid::DerUnit& unit, double v_bus,
                          const ModeSwitchThresholds& thresholds,
                          const VscParams& params, bool restore_directive) {
  grid::DerUnit out = unit;
  if (restore_directive) {
    if (unit.mode == grid::Mode::kVsc && v_bus > thresholds.v_high) {
      out.mode = grid::Mode::kCsc;
      out.gamma_offset = 0.0;
    }
    return out;
  }
  if (unit.mode == grid::Mode::kCsc && v_bus < thresholds.v_low) {
    out.mode = grid::Mode::kVsc;
    out.x = params.x;
    out.r = params.r;
    out.i_csc = 0.0;
  }
  return out;
}

}  // namespace powertalk::control
