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
#include <map>
#include <vector>

#include "powertalk/grid.hpp"

namespace powertalk::control {

/// One unit's periodic measurement report to the central controller.
struct SecondaryReport {
  int unit_id = 0;
  double v_meas = 0.0;  // local measurement of the DC bus voltage [V]
  double i_meas = 0.0;  // output current [A]
};

struct PiGains {
  double kp_v = 0.05;  // voltage restoration, proportional
  double ki_v = 0.5;   // voltage restoration, integral (per secondary period)
  double kp_c = 0.02;  // current sharing, proportional
  double ki_c = 0.2;   // current sharing, integral (per secondary period)
};

/// Central secondary controller state: one global voltage-restoration offset
/// and one current-sharing offset per authenticated unit. While `enabled` is
/// false every offset stays frozen at its last value.
class SecondaryState {
 public:
  SecondaryState() = default;
  explicit SecondaryState(PiGains gains) : gains_(gains) {}

  /// One discrete PI update from a full round of reports.
  /// Voltage loop error: v_ref - mean(v_meas). Sharing loop error per unit:
  /// mean(i_meas) - i_meas, so the sharing offsets redistribute current
  /// without moving the voltage level (their sum stays at zero).
  void step(const std::vector<SecondaryReport>& reports, double v_ref);

  /// Effective reference voltage for a unit: x + delta_x_v + delta_x_c when
  /// the unit is an authenticated VSC, plain x otherwise.
  double apply_offsets(const grid::DerUnit& unit, bool authenticated) const;

  /// Registers a freshly authenticated unit (sharing offset starts at zero).
  void admit(int unit_id);
  /// Drops a unit from the sharing loop (its offset and integrator go away).
  void evict(int unit_id);

  void set_enabled(bool enabled) { enabled_ = enabled; }
  bool enabled() const { return enabled_; }

  double delta_x_v() const { return delta_x_v_; }
  double delta_x_c(int unit_id) const;
  /// Sum of all sharing offsets; stays within rounding of zero.
  double delta_x_c_sum() const;
  const std::map<int, double>& sharing_offsets() const { return delta_x_c_; }
  const PiGains& gains() const { return gains_; }

 private:
  PiGains gains_{};
  bool enabled_ = true;
  double delta_x_v_ = 0.0;
  double integ_v_ = 0.0;
  std::map<int, double> delta_x_c_;
  std::map<int, double> integ_c_;
};

/// Opaque tertiary exchange occurring once per tertiary period. The payloads
/// carry no semantics here; the exchange only anchors the slow-control
/// timeline.
struct TertiaryStub {
  std::vector<std::uint8_t> uplink;    // z, per-unit uplink payload
  std::vector<std::uint8_t> downlink;  // q, per-unit downlink payload
  double period_s = 300.0;             // T^tc
};

struct ModeSwitchThresholds {
  double v_low = 45.0;   // CSC -> VSC when the bus drops below this
  double v_high = 49.0;  // VSC -> CSC restore ceiling (CC directive)
};

/// Voltage parameters a CSC adopts when it switches to VSC mode.
struct VscParams {
  double x = 48.0;
  double r = 0.2;
};

/// Threshold-triggered primary-mode switch. A CSC becomes a VSC (with the
/// configured x, r) when v_bus < v_low; `restore_directive` flips a
/// dual-mode VSC back to CSC. Units already in the requested mode pass
/// through unchanged.
grid::DerUnit mode_switch(const grid::DerUnit& unit, double v_bus,
                          const ModeSwitchThresholds& thresholds,
                          const VscParams& params,
                          bool restore_directive = false);

}  // namespace powertalk::control
