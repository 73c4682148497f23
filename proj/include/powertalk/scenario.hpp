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

#include "powertalk/control.hpp"
#include "powertalk/grid.hpp"
#include "powertalk/phy.hpp"
#include "powertalk/protocol.hpp"

namespace powertalk::sim {

/// Scheduled resistive load step; either an absolute new value or a
/// multiplicative factor on the current one.
struct LoadStep {
  double t_s = 0.0;
  std::optional<double> r_load;
  std::optional<double> factor;
};

/// Memoryless random load-change process, one arrival draw per slot.
struct PoissonLoad {
  double lambda_per_slot = 0.0;
  double factor_min = 0.7;
  double factor_max = 1.3;
  double r_floor = 0.2;  // [ohm]
};

/// The DER that wants to join the upper-level control. It either appears in
/// VSC mode at `arrival_s`, or sits on the grid as a CSC from the start and
/// switches to VSC when the bus voltage crosses the mode-switch threshold.
struct IncomingSpec {
  int id = 6;
  std::optional<double> arrival_s;  // empty => threshold-triggered arrival
  double x = 48.0;
  double r = 0.2;
  double r_line = 0.2;
  double i_csc = 0.0;       // injection while still a CSC (threshold mode)
  std::string pmk_hex;      // 32-byte master key held by the station
  std::string cc_pmk_hex;   // key the controller expects; empty = same
};

enum class AttackMode { kCorruptTag, kReplaceNonce };

/// One-shot message corruption by a grid-attached attacker. corrupt_tag flips
/// the confirmation tag (for h1, which carries no tag, the ANonce; for Acks,
/// a padding byte). replace_nonce overwrites the nonce in h1/h2.
struct AttackSpec {
  proto::MessageKind target = proto::MessageKind::kH2;
  AttackMode mode = AttackMode::kCorruptTag;
};

struct ProtocolSpec {
  std::optional<std::int64_t> d_periods;  // empty = minimal fit ("auto")
  std::optional<std::int64_t> r_periods;
  std::int64_t l_per_tertiary = 1;
  double t_tc_s = 300.0;
  double ptarch_offset_s = 0.0;
};

struct ControlSpec {
  double v_ref = 48.0;
  control::PiGains gains{};
  int cc_unit = 0;
  std::optional<control::ModeSwitchThresholds> mode_switch;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double duration_s = 10.0;
  double r_load = 1.5;
  std::vector<grid::DerUnit> units;  // initial units; gamma_offset ignored
  std::vector<LoadStep> load_steps;
  PoissonLoad poisson{};
  phy::PhyConfig phy{};
  ProtocolSpec protocol{};
  ControlSpec control{};
  std::optional<IncomingSpec> incoming;
  std::optional<AttackSpec> attack;

  std::int64_t duration_slots() const;
  std::int64_t slot_of(double t_s) const;
  std::int64_t resolved_d_periods() const;
  std::int64_t resolved_r_periods() const;
  proto::SchedulerConfig scheduler_config() const;

  /// Full cross-field validation; throws ConfigError naming the field.
  void validate() const;

  /// Structured-text (JSON) round trip. parse(serialize(c)) == c.
  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig load_file(const std::string& path);
  std::string to_json_text() const;
};

/// Returns a copy of `config` whose run corrupts the first transmitted
/// instance of `target` once.
ScenarioConfig inject_attack(ScenarioConfig config, proto::MessageKind target,
                             AttackMode mode);

const char* attack_mode_name(AttackMode mode);
proto::MessageKind kind_from_name(const std::string& name);

}  // namespace powertalk::sim
