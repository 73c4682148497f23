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
#include "powertalk/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "powertalk/errors.hpp"
#include "powertalk/prf.hpp"

namespace powertalk::sim {

using nlohmann::json;

std::int64_t ScenarioConfig::duration_slots() const {
  return std::llround(duration_s / phy.t_pt);
}

std::int64_t ScenarioConfig::slot_of(double t_s) const {
  return std::llround(t_s / phy.t_pt);
}

std::int64_t ScenarioConfig::resolved_d_periods() const {
  return protocol.d_periods.value_or(
      proto::min_d_periods(phy.s_slots, phy.repetition_code));
}

std::int64_t ScenarioConfig::resolved_r_periods() const {
  return protocol.r_periods.value_or(
      proto::min_r_periods(phy.s_slots, phy.repetition_code));
}

proto::SchedulerConfig ScenarioConfig::scheduler_config() const {
  proto::SchedulerConfig sc;
  sc.d_periods = resolved_d_periods();
  sc.r_periods = resolved_r_periods();
  sc.l_per_tertiary = protocol.l_per_tertiary;
  sc.s_slots = phy.s_slots;
  sc.slots_per_tertiary = std::llround(protocol.t_tc_s / phy.t_pt);
  sc.ptarch_offset_slots = slot_of(protocol.ptarch_offset_s);
  sc.repetition_code = phy.repetition_code;
  return sc;
}

void ScenarioConfig::validate() const {
  if (units.empty()) throw ConfigError("grid.units", "at least one unit");
  std::set<int> ids;
  double min_x = std::numeric_limits<double>::infinity();
  bool any_vsc = false;
  for (const grid::DerUnit& u : units) {
    if (!ids.insert(u.id).second) {
      throw ConfigError("grid.units", "duplicate unit id " +
                                          std::to_string(u.id));
    }
    if (u.mode == grid::Mode::kVsc) {
      any_vsc = true;
      if (!(u.r > 0.0)) {
        throw ConfigError("grid.units", "unit " + std::to_string(u.id) +
                                            " needs r > 0");
      }
      if (!(u.x > 0.0)) {
        throw ConfigError("grid.units", "unit " + std::to_string(u.id) +
                                            " needs x > 0");
      }
      min_x = std::min(min_x, u.x);
    }
    if (u.r_line < 0.0) {
      throw ConfigError("grid.units", "unit " + std::to_string(u.id) +
                                          " needs r_line >= 0");
    }
  }
  if (!any_vsc) {
    throw ConfigError("grid.units", "at least one unit must start in VSC "
                                    "mode");
  }
  if (!(r_load > 0.0)) throw ConfigError("grid.r_load", "must be > 0");

  if (incoming) {
    if (ids.count(incoming->id)) {
      throw ConfigError("incoming.id", "collides with an existing unit id");
    }
    if (!(incoming->x > 0.0) || !(incoming->r > 0.0) ||
        incoming->r_line < 0.0) {
      throw ConfigError("incoming", "needs x > 0, r > 0, r_line >= 0");
    }
    min_x = std::min(min_x, incoming->x);
    if (proto::from_hex(incoming->pmk_hex).size() != 32) {
      throw ConfigError("incoming.pmk", "must be 32 bytes of hex");
    }
    if (!incoming->cc_pmk_hex.empty() &&
        proto::from_hex(incoming->cc_pmk_hex).size() != 32) {
      throw ConfigError("incoming.cc_pmk", "must be 32 bytes of hex");
    }
    if (incoming->arrival_s) {
      if (*incoming->arrival_s < 0.0 || *incoming->arrival_s >= duration_s) {
        throw ConfigError("incoming.arrival_s",
                          "must lie inside the run duration");
      }
    } else if (!control.mode_switch) {
      throw ConfigError("incoming.arrival_s",
                        "threshold-triggered arrival needs "
                        "control.mode_switch thresholds");
    }
  }

  phy.validate(min_x);

  if (!(duration_s > 0.0)) throw ConfigError("duration_s", "must be > 0");
  const proto::SchedulerConfig sc = scheduler_config();
  sc.validate();
  if (duration_slots() < sc.ptarch_period_slots()) {
    throw ConfigError("duration_s",
                      "must cover at least one PTARCh recurrence period");
  }

  if (!ids.count(control.cc_unit)) {
    throw ConfigError("control.cc_unit", "must reference an initial unit");
  }
  for (const grid::DerUnit& u : units) {
    if (u.id == control.cc_unit && u.mode != grid::Mode::kVsc) {
      throw ConfigError("control.cc_unit", "must be a VSC unit");
    }
  }
  if (!(control.v_ref > 0.0)) throw ConfigError("control.v_ref", "must be > 0");

  for (const LoadStep& s : load_steps) {
    if (s.r_load.has_value() == s.factor.has_value()) {
      throw ConfigError("load.steps",
                        "each step needs exactly one of r_load / factor");
    }
    if (s.r_load && !(*s.r_load > 0.0)) {
      throw ConfigError("load.steps", "r_load must be > 0");
    }
    if (s.factor && !(*s.factor > 0.0)) {
      throw ConfigError("load.steps", "factor must be > 0");
    }
    if (s.t_s < 0.0 || s.t_s >= duration_s) {
      throw ConfigError("load.steps", "t_s must lie inside the run duration");
    }
  }
  if (poisson.lambda_per_slot < 0.0) {
    throw ConfigError("load.poisson.lambda_per_slot", "must be >= 0");
  }
  if (poisson.lambda_per_slot > 0.0 &&
      !(poisson.factor_min > 0.0 && poisson.factor_max >= poisson.factor_min)) {
    throw ConfigError("load.poisson", "needs 0 < factor_min <= factor_max");
  }
  if (poisson.lambda_per_slot > 0.0 && !(poisson.r_floor > 0.0)) {
    throw ConfigError("load.poisson.r_floor", "must be > 0");
  }

  if (attack) {
    if (attack->mode == AttackMode::kReplaceNonce &&
        attack->target != proto::MessageKind::kH1 &&
        attack->target != proto::MessageKind::kH2) {
      throw ConfigError("attack.target",
                        "replace_nonce applies to h1 or h2 only");
    }
    if (attack->target == proto::MessageKind::kAssocRequest ||
        attack->target == proto::MessageKind::kAssocResponse) {
      throw ConfigError("attack.target",
                        "corruption targets the handshake messages or acks");
    }
    if (!incoming) {
      throw ConfigError("attack", "an attack needs an incoming unit");
    }
  }
}

// ---------------------------------------------------------------------------
// JSON mapping
// ---------------------------------------------------------------------------

namespace {

const json& require_field(const json& j, const std::string& path,
                          const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(path.empty() ? key : path + "." + key, "missing field");
  }
  return *it;
}

double get_num(const json& j, const std::string& path, const std::string& key) {
  const json& v = require_field(j, path, key);
  if (!v.is_number()) {
    throw ConfigError(path.empty() ? key : path + "." + key,
                      "expected a number");
  }
  return v.get<double>();
}

double get_num_or(const json& j, const std::string& path,
                  const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return get_num(j, path, key);
}

std::int64_t get_int(const json& j, const std::string& path,
                     const std::string& key) {
  const json& v = require_field(j, path, key);
  if (!v.is_number_integer()) {
    throw ConfigError(path.empty() ? key : path + "." + key,
                      "expected an integer");
  }
  return v.get<std::int64_t>();
}

std::int64_t get_int_or(const json& j, const std::string& path,
                        const std::string& key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  return get_int(j, path, key);
}

std::string get_str(const json& j, const std::string& path,
                    const std::string& key) {
  const json& v = require_field(j, path, key);
  if (!v.is_string()) {
    throw ConfigError(path.empty() ? key : path + "." + key,
                      "expected a string");
  }
  return v.get<std::string>();
}

}  // namespace

proto::MessageKind kind_from_name(const std::string& name) {
  using proto::MessageKind;
  if (name == "assoc_request") return MessageKind::kAssocRequest;
  if (name == "assoc_response") return MessageKind::kAssocResponse;
  if (name == "h1") return MessageKind::kH1;
  if (name == "h2") return MessageKind::kH2;
  if (name == "h3") return MessageKind::kH3;
  if (name == "h4") return MessageKind::kH4;
  if (name == "ack") return MessageKind::kAck;
  throw ConfigError("attack.target", "unknown message kind '" + name + "'");
}

const char* attack_mode_name(AttackMode mode) {
  return mode == AttackMode::kCorruptTag ? "corrupt_tag" : "replace_nonce";
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("json", e.what());
  }

  ScenarioConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(get_int(j, "", "seed"));
  cfg.duration_s = get_num(j, "", "duration_s");

  const json& jg = require_field(j, "", "grid");
  cfg.r_load = get_num(jg, "grid", "r_load");
  const json& junits = require_field(jg, "grid", "units");
  if (!junits.is_array() ) {
    throw ConfigError("grid.units", "expected an array");
  }
  for (const json& ju : junits) {
    grid::DerUnit u;
    u.id = static_cast<int>(get_int(ju, "grid.units", "id"));
    const std::string mode = get_str(ju, "grid.units", "mode");
    if (mode == "vsc") {
      u.mode = grid::Mode::kVsc;
    } else if (mode == "csc") {
      u.mode = grid::Mode::kCsc;
    } else {
      throw ConfigError("grid.units.mode", "expected 'vsc' or 'csc'");
    }
    u.x = get_num_or(ju, "grid.units", "x", 48.0);
    u.r = get_num_or(ju, "grid.units", "r", 0.2);
    u.r_line = get_num_or(ju, "grid.units", "r_line", 0.0);
    u.i_csc = get_num_or(ju, "grid.units", "i_csc", 0.0);
    cfg.units.push_back(u);
  }

  if (j.contains("load")) {
    const json& jl = j.at("load");
    if (jl.contains("steps")) {
      for (const json& js : jl.at("steps")) {
        LoadStep s;
        s.t_s = get_num(js, "load.steps", "t_s");
        if (js.contains("r_load")) s.r_load = get_num(js, "load.steps", "r_load");
        if (js.contains("factor")) s.factor = get_num(js, "load.steps", "factor");
        cfg.load_steps.push_back(s);
      }
    }
    if (jl.contains("poisson")) {
      const json& jp = jl.at("poisson");
      cfg.poisson.lambda_per_slot =
          get_num_or(jp, "load.poisson", "lambda_per_slot", 0.0);
      cfg.poisson.factor_min = get_num_or(jp, "load.poisson", "factor_min", 0.7);
      cfg.poisson.factor_max = get_num_or(jp, "load.poisson", "factor_max", 1.3);
      cfg.poisson.r_floor = get_num_or(jp, "load.poisson", "r_floor", 0.2);
    }
  }

  const json& jp = require_field(j, "", "phy");
  cfg.phy.gamma = get_num(jp, "phy", "gamma");
  cfg.phy.t_pt = get_num(jp, "phy", "t_pt_s");
  cfg.phy.tau = get_num_or(jp, "phy", "tau_s", 0.00235);
  cfg.phy.nu = get_num_or(jp, "phy", "nu_hz", 50.0e6);
  cfg.phy.eta = get_num_or(jp, "phy", "eta_v", 8.58e-2);
  cfg.phy.m_blank = static_cast<int>(get_int_or(jp, "phy", "m_blank", 4));
  cfg.phy.s_slots = static_cast<int>(get_int_or(jp, "phy", "s_slots", 1));
  if (jp.contains("observe")) {
    const std::string observe = get_str(jp, "phy", "observe");
    if (observe == "terminal") {
      cfg.phy.observe = phy::Observe::kTerminal;
    } else if (observe == "bus") {
      cfg.phy.observe = phy::Observe::kBus;
    } else {
      throw ConfigError("phy.observe", "expected 'terminal' or 'bus'");
    }
  }
  if (jp.contains("repetition_code")) {
    const json& v = jp.at("repetition_code");
    if (!v.is_boolean()) {
      throw ConfigError("phy.repetition_code", "expected a boolean");
    }
    cfg.phy.repetition_code = v.get<bool>();
  }

  if (j.contains("protocol")) {
    const json& jpr = j.at("protocol");
    if (jpr.contains("d_periods") && !jpr.at("d_periods").is_string()) {
      cfg.protocol.d_periods = get_int(jpr, "protocol", "d_periods");
    }
    if (jpr.contains("r_periods") && !jpr.at("r_periods").is_string()) {
      cfg.protocol.r_periods = get_int(jpr, "protocol", "r_periods");
    }
    cfg.protocol.l_per_tertiary =
        get_int_or(jpr, "protocol", "l_per_tertiary", 1);
    cfg.protocol.t_tc_s = get_num_or(jpr, "protocol", "t_tc_s", 300.0);
    cfg.protocol.ptarch_offset_s =
        get_num_or(jpr, "protocol", "ptarch_offset_s", 0.0);
  }

  if (j.contains("control")) {
    const json& jc = j.at("control");
    cfg.control.v_ref = get_num_or(jc, "control", "v_ref", 48.0);
    cfg.control.gains.kp_v = get_num_or(jc, "control", "kp_v", 0.05);
    cfg.control.gains.ki_v = get_num_or(jc, "control", "ki_v", 0.5);
    cfg.control.gains.kp_c = get_num_or(jc, "control", "kp_c", 0.02);
    cfg.control.gains.ki_c = get_num_or(jc, "control", "ki_c", 0.2);
    cfg.control.cc_unit = static_cast<int>(get_int_or(jc, "control", "cc_unit", 0));
    if (jc.contains("mode_switch")) {
      const json& jm = jc.at("mode_switch");
      control::ModeSwitchThresholds th;
      th.v_low = get_num(jm, "control.mode_switch", "v_low");
      th.v_high = get_num_or(jm, "control.mode_switch", "v_high", th.v_low + 4.0);
      cfg.control.mode_switch = th;
    }
  }

  if (j.contains("incoming")) {
    const json& ji = j.at("incoming");
    IncomingSpec inc;
    inc.id = static_cast<int>(get_int(ji, "incoming", "id"));
    if (ji.contains("arrival_s")) {
      inc.arrival_s = get_num(ji, "incoming", "arrival_s");
    }
    inc.x = get_num_or(ji, "incoming", "x", 48.0);
    inc.r = get_num_or(ji, "incoming", "r", 0.2);
    inc.r_line = get_num_or(ji, "incoming", "r_line", 0.0);
    inc.i_csc = get_num_or(ji, "incoming", "i_csc", 0.0);
    inc.pmk_hex = get_str(ji, "incoming", "pmk");
    if (ji.contains("cc_pmk")) {
      inc.cc_pmk_hex = get_str(ji, "incoming", "cc_pmk");
    }
    cfg.incoming = inc;
  }

  if (j.contains("attack")) {
    const json& ja = j.at("attack");
    AttackSpec atk;
    atk.target = kind_from_name(get_str(ja, "attack", "target"));
    const std::string mode = get_str(ja, "attack", "mode");
    if (mode == "corrupt_tag") {
      atk.mode = AttackMode::kCorruptTag;
    } else if (mode == "replace_nonce") {
      atk.mode = AttackMode::kReplaceNonce;
    } else {
      throw ConfigError("attack.mode",
                        "expected 'corrupt_tag' or 'replace_nonce'");
    }
    cfg.attack = atk;
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config", "cannot open '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

std::string ScenarioConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["duration_s"] = duration_s;

  json junits = json::array();
  for (const grid::DerUnit& u : units) {
    json ju;
    ju["id"] = u.id;
    ju["mode"] = u.mode == grid::Mode::kVsc ? "vsc" : "csc";
    ju["x"] = u.x;
    ju["r"] = u.r;
    ju["r_line"] = u.r_line;
    ju["i_csc"] = u.i_csc;
    junits.push_back(ju);
  }
  j["grid"] = {{"r_load", r_load}, {"units", junits}};

  json jsteps = json::array();
  for (const LoadStep& s : load_steps) {
    json js;
    js["t_s"] = s.t_s;
    if (s.r_load) js["r_load"] = *s.r_load;
    if (s.factor) js["factor"] = *s.factor;
    jsteps.push_back(js);
  }
  j["load"] = {{"steps", jsteps},
               {"poisson",
                {{"lambda_per_slot", poisson.lambda_per_slot},
                 {"factor_min", poisson.factor_min},
                 {"factor_max", poisson.factor_max},
                 {"r_floor", poisson.r_floor}}}};

  j["phy"] = {{"gamma", phy.gamma},
              {"t_pt_s", phy.t_pt},
              {"tau_s", phy.tau},
              {"nu_hz", phy.nu},
              {"eta_v", phy.eta},
              {"m_blank", phy.m_blank},
              {"s_slots", phy.s_slots},
              {"observe",
               phy.observe == phy::Observe::kBus ? "bus" : "terminal"},
              {"repetition_code", phy.repetition_code}};

  json jpr;
  if (protocol.d_periods) {
    jpr["d_periods"] = *protocol.d_periods;
  } else {
    jpr["d_periods"] = "auto";
  }
  if (protocol.r_periods) {
    jpr["r_periods"] = *protocol.r_periods;
  } else {
    jpr["r_periods"] = "auto";
  }
  jpr["l_per_tertiary"] = protocol.l_per_tertiary;
  jpr["t_tc_s"] = protocol.t_tc_s;
  jpr["ptarch_offset_s"] = protocol.ptarch_offset_s;
  j["protocol"] = jpr;

  json jc;
  jc["v_ref"] = control.v_ref;
  jc["kp_v"] = control.gains.kp_v;
  jc["ki_v"] = control.gains.ki_v;
  jc["kp_c"] = control.gains.kp_c;
  jc["ki_c"] = control.gains.ki_c;
  jc["cc_unit"] = control.cc_unit;
  if (control.mode_switch) {
    jc["mode_switch"] = {{"v_low", control.mode_switch->v_low},
                         {"v_high", control.mode_switch->v_high}};
  }
  j["control"] = jc;

  if (incoming) {
    json ji;
    ji["id"] = incoming->id;
    if (incoming->arrival_s) ji["arrival_s"] = *incoming->arrival_s;
    ji["x"] = incoming->x;
    ji["r"] = incoming->r;
    ji["r_line"] = incoming->r_line;
    ji["i_csc"] = incoming->i_csc;
    ji["pmk"] = incoming->pmk_hex;
    if (!incoming->cc_pmk_hex.empty()) ji["cc_pmk"] = incoming->cc_pmk_hex;
    j["incoming"] = ji;
  }

  if (attack) {
    j["attack"] = {{"target", proto::kind_name(attack->target)},
                   {"mode", attack_mode_name(attack->mode)}};
  }

  return j.dump(2) + "\n";
}

ScenarioConfig inject_attack(ScenarioConfig config, proto::MessageKind target,
                             AttackMode mode) {
  config.attack = AttackSpec{target, mode};
  config.validate();
  return config;
}

}  // namespace powertalk::sim
