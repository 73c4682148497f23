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
#include "powertalk/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "powertalk/errors.hpp"
#include "powertalk/prf.hpp"
#include "powertalk/rng.hpp"

namespace powertalk::sim {

namespace {

enum class Side { kCc, kSta };

const char* side_name(Side s) { return s == Side::kCc ? "cc" : "sta"; }
Side other(Side s) { return s == Side::kCc ? Side::kSta : Side::kCc; }

std::array<std::uint8_t, 6> mac_for_unit(int unit_id) {
  return {0x02, 0x00, 0x00, 0x00, 0x00, static_cast<std::uint8_t>(unit_id)};
}

std::array<std::uint8_t, 32> draw_nonce(Rng& rng) {
  std::array<std::uint8_t, 32> out{};
  for (int k = 0; k < 4; ++k) {
    const std::uint64_t word = rng.next_u64();
    for (int b = 0; b < 8; ++b) {
      out[k * 8 + b] = static_cast<std::uint8_t>(word >> (8 * b));
    }
  }
  return out;
}

/// Flips or replaces the confirmation-relevant bytes of a serialized
/// message. The 3-byte framing header is never touched.
void corrupt_wire(proto::Bytes& wire, proto::MessageKind kind,
                  AttackMode mode) {
  using proto::MessageKind;
  if (mode == AttackMode::kReplaceNonce) {
    // Nonce sits after the 6-byte MAC in h1/h2 bodies.
    for (std::size_t k = 0; k < 32; ++k) wire[3 + 6 + k] = 0xa7;
    return;
  }
  switch (kind) {
    case MessageKind::kH1:
      wire[3 + 6] ^= 0xff;  // no tag; corrupt the ANonce
      break;
    case MessageKind::kH2:
      wire[3 + 38] ^= 0xff;
      break;
    case MessageKind::kH3:
      wire[3 + 32] ^= 0xff;
      break;
    case MessageKind::kH4:
      wire[3 + 0] ^= 0xff;
      break;
    case MessageKind::kAck:
      wire[wire.size() - 1] ^= 0xff;  // padding only; acks carry no keys
      break;
    default:
      break;
  }
}

struct Transceiver {
  int unit_id = -1;
  Rng noise{0};
  phy::DetectorState rx_det;    // levels for the peer's transmissions
  phy::DetectorState self_det;  // own-terminal levels while transmitting
  std::vector<phy::SlotObservation> blanks;
};

struct Transmission {
  Side sender = Side::kCc;
  proto::MessageKind kind = proto::MessageKind::kAck;
  std::vector<std::uint8_t> bits;  // on-air slot bits
  std::size_t cursor = 0;
};

struct RxAccum {
  std::vector<std::uint8_t> group;      // slot bits of the current data bit
  std::vector<std::uint8_t> data_bits;  // decoded message bits
  std::optional<std::size_t> total_data_bits;

  void reset() {
    group.clear();
    data_bits.clear();
    total_data_bits.reset();
  }
};

class Engine {
 public:
  Engine(const ScenarioConfig& config, bool record_detail)
      : cfg_(config),
        detail_(record_detail),
        sched_(config.scheduler_config()),
        secondary_(config.control.gains),
        rng_load_(derive_seed(config.seed, 0x10ad)),
        rng_keys_(derive_seed(config.seed, 0x4e15)) {
    cfg_.validate();
    s_ = cfg_.phy.s_slots;
    duration_ = cfg_.duration_slots();
    load_.r_load = cfg_.r_load;
    units_ = cfg_.units;
    for (grid::DerUnit& u : units_) u.gamma_offset = 0.0;

    for (const grid::DerUnit& u : units_) {
      if (u.mode == grid::Mode::kVsc) {
        authenticated_.insert(u.id);
        secondary_.admit(u.id);
      }
    }

    if (cfg_.incoming) {
      const IncomingSpec& inc = *cfg_.incoming;
      if (!inc.arrival_s) {
        // Dual-mode unit: on the grid as a CSC until the bus sags.
        grid::DerUnit u;
        u.id = inc.id;
        u.mode = grid::Mode::kCsc;
        u.x = inc.x;
        u.r = inc.r;
        u.r_line = inc.r_line;
        u.i_csc = inc.i_csc;
        units_.push_back(u);
      }
      cc_tr_.unit_id = cfg_.control.cc_unit;
      sta_tr_.unit_id = inc.id;
      cc_tr_.noise = Rng(derive_seed(cfg_.seed, 0xcc00));
      sta_tr_.noise = Rng(derive_seed(cfg_.seed, 0x57a0));
      reset_sessions();
    }

    trace_ids_.clear();
    for (const grid::DerUnit& u : cfg_.units) trace_ids_.push_back(u.id);
    if (cfg_.incoming) trace_ids_.push_back(cfg_.incoming->id);
    std::sort(trace_ids_.begin(), trace_ids_.end());
    metrics_.trace_unit_ids = trace_ids_;

    last_state_ = solve(false);
  }

  RunResult run() {
    for (std::uint64_t slot = 0; slot < static_cast<std::uint64_t>(duration_);
         ++slot) {
      step_slot(slot);
    }
    metrics_.cc_keys_installed = cc_ && cc_->keys_installed();
    metrics_.sta_keys_installed = sta_ && sta_->keys_installed();
    RunResult result;
    result.metrics = std::move(metrics_);
    result.log = std::move(log_);
    return result;
  }

 private:
  // ------------------------------------------------------------------ util

  std::size_t index_of(int unit_id) const {
    for (std::size_t k = 0; k < units_.size(); ++k) {
      if (units_[k].id == unit_id) return k;
    }
    throw InvariantViolationError("unit " + std::to_string(unit_id) +
                                  " not on the grid");
  }

  std::vector<double> build_offsets() const {
    std::vector<double> offsets(units_.size(), 0.0);
    for (std::size_t k = 0; k < units_.size(); ++k) {
      const grid::DerUnit& u = units_[k];
      offsets[k] = secondary_.apply_offsets(u, authenticated_.count(u.id) > 0) -
                   u.x;
    }
    return offsets;
  }

  grid::GridSteadyState solve(bool check = true) const {
    const std::vector<double> offsets = build_offsets();
    grid::GridSteadyState state = grid::solve_steady_state(units_, load_, offsets);
    if (check) {
      const double residual = grid::kcl_residual(state, load_);
      if (residual > 1e-9 * std::max(1.0, std::abs(state.v_bus))) {
        throw InvariantViolationError("KCL residual " + fmt_g17(residual) +
                                      " out of tolerance");
      }
    }
    return state;
  }

  double observed_value(const grid::GridSteadyState& state, Side side) const {
    if (cfg_.phy.observe == phy::Observe::kBus) return state.v_bus;
    const Transceiver& tr = side == Side::kCc ? cc_tr_ : sta_tr_;
    return state.v[index_of(tr.unit_id)];
  }

  Transceiver& transceiver(Side side) {
    return side == Side::kCc ? cc_tr_ : sta_tr_;
  }

  void reset_sessions() {
    const IncomingSpec& inc = *cfg_.incoming;
    const proto::Bytes sta_pmk = proto::from_hex(inc.pmk_hex);
    const proto::Bytes cc_pmk = inc.cc_pmk_hex.empty()
                                    ? sta_pmk
                                    : proto::from_hex(inc.cc_pmk_hex);
    const auto snonce = draw_nonce(rng_keys_);
    const auto anonce = draw_nonce(rng_keys_);
    const auto gtk_arr = draw_nonce(rng_keys_);
    proto::LogFn logger;
    if (detail_) {
      logger = [this](const std::string& msg) {
        log_.append(current_slot_, "session", msg);
      };
    }
    sta_.emplace(sta_pmk, mac_for_unit(inc.id), snonce, logger);
    cc_.emplace(cc_pmk, mac_for_unit(cfg_.control.cc_unit), anonce,
                proto::Bytes(gtk_arr.begin(), gtk_arr.end()), logger);
  }

  // ------------------------------------------------------------- slot loop

  void step_slot(std::uint64_t slot) {
    current_slot_ = slot;
    apply_load_events(slot);
    handle_arrival(slot);
    handle_windows(slot);
    maybe_secondary_step(slot);
    process_phy(slot);
    maybe_snapshot(slot);
  }

  void apply_load_events(std::uint64_t slot) {
    for (const LoadStep& step : cfg_.load_steps) {
      if (static_cast<std::uint64_t>(cfg_.slot_of(step.t_s)) == slot) {
        const double old_r = load_.r_load;
        load_.r_load = step.r_load ? *step.r_load : old_r * *step.factor;
        ++metrics_.load_changes;
        log(slot, "load_change", "source=step r_old=" + fmt_g17(old_r) +
                                     " r_new=" + fmt_g17(load_.r_load));
      }
    }
    // One arrival draw per slot; lambda is per power talk slot.
    const double u = rng_load_.uniform();
    if (cfg_.poisson.lambda_per_slot > 0.0 &&
        u < 1.0 - std::exp(-cfg_.poisson.lambda_per_slot)) {
      const double f = cfg_.poisson.factor_min +
                       (cfg_.poisson.factor_max - cfg_.poisson.factor_min) *
                           rng_load_.uniform();
      const double old_r = load_.r_load;
      load_.r_load = std::max(cfg_.poisson.r_floor, old_r * f);
      ++metrics_.load_changes;
      log(slot, "load_change", "source=poisson r_old=" + fmt_g17(old_r) +
                                   " r_new=" + fmt_g17(load_.r_load));
    }
  }

  void handle_arrival(std::uint64_t slot) {
    if (!cfg_.incoming || incoming_is_vsc_) return;
    const IncomingSpec& inc = *cfg_.incoming;
    if (inc.arrival_s) {
      if (slot != static_cast<std::uint64_t>(cfg_.slot_of(*inc.arrival_s))) {
        return;
      }
      grid::DerUnit u;
      u.id = inc.id;
      u.mode = grid::Mode::kVsc;
      u.x = inc.x;
      u.r = inc.r;
      u.r_line = inc.r_line;
      units_.push_back(u);
      incoming_is_vsc_ = true;
      log(slot, "arrival", "unit=" + std::to_string(inc.id));
      log(slot, "mode_switch",
          "unit=" + std::to_string(inc.id) + " from=offline to=vsc");
    } else {
      // Threshold-triggered dual-mode switch, one slot of sensing delay.
      if (last_state_.v_bus >= cfg_.control.mode_switch->v_low) return;
      const std::size_t k = index_of(inc.id);
      units_[k] = control::mode_switch(units_[k], last_state_.v_bus,
                                       *cfg_.control.mode_switch,
                                       {inc.x, inc.r});
      if (units_[k].mode == grid::Mode::kVsc) {
        incoming_is_vsc_ = true;
        log(slot, "mode_switch",
            "unit=" + std::to_string(inc.id) + " from=csc to=vsc v_bus=" +
                fmt_g17(last_state_.v_bus));
      }
    }
  }

  void handle_windows(std::uint64_t slot) {
    const proto::ScheduleWindow w = sched_.window_at(slot);

    if (w.kind != last_window_kind_) {
      const char* name =
          w.kind == proto::ScheduleWindow::Kind::kPtarch   ? "ptarch"
          : w.kind == proto::ScheduleWindow::Kind::kPthach ? "pthach"
                                                           : "secondary_on";
      log(slot, "window", std::string("kind=") + name +
                              " start=" + std::to_string(w.start_slot) +
                              " len=" + std::to_string(w.length_slots));
      last_window_kind_ = w.kind;
    }

    if (handshake_engaged_ &&
        w.kind == proto::ScheduleWindow::Kind::kSecondaryOn) {
      abort_handshake(slot, "window_expired");
      return;
    }

    // The incoming DER accesses the PTARCh at its start slot.
    if (sta_ && incoming_is_vsc_ && !handshake_engaged_ &&
        sta_->state() == proto::SessionState::kIdle &&
        w.kind == proto::ScheduleWindow::Kind::kPtarch &&
        slot == w.start_slot) {
      sched_.use_ptarch(slot);
      sta_->on_ptarch_open();
      handshake_engaged_ = true;
      metrics_.handshake_attempted = true;
      ++metrics_.attempts;
      metrics_.access_slot = slot;
      window_remaining_bits_ =
          proto::assoc_exchange_bits(cfg_.phy.repetition_code);
      calibrate_detectors(slot);
      log(slot, "ptarch_access", "unit=" + std::to_string(sta_tr_.unit_id));
      auto first = sta_->step(std::nullopt);
      if (!first) {
        throw InvariantViolationError("station produced no association "
                                      "request at PTARCh access");
      }
      queue_transmission(Side::kSta, *first);
      activate_pending(slot);  // first bit goes out this very slot
    }
  }

  void maybe_secondary_step(std::uint64_t slot) {
    if (slot % static_cast<std::uint64_t>(s_) != 0) return;
    tertiary_tick(slot);
    const bool enabled = sched_.secondary_enabled(slot);
    if (enabled != secondary_.enabled()) {
      secondary_.set_enabled(enabled);
      log(slot, "secondary", enabled ? "state=on" : "state=off");
    }
    if (!enabled || authenticated_.empty()) return;

    const grid::GridSteadyState measured = solve();
    std::vector<control::SecondaryReport> reports;
    for (std::size_t k = 0; k < units_.size(); ++k) {
      const grid::DerUnit& u = units_[k];
      if (u.mode == grid::Mode::kVsc && authenticated_.count(u.id)) {
        // Units report their local sensing of the DC bus plus own current.
        reports.push_back({u.id, measured.v_bus, measured.i[k]});
      }
    }
    secondary_.step(reports, cfg_.control.v_ref);
    if (detail_) {
      std::string fields = "dxv=" + fmt_g17(secondary_.delta_x_v());
      for (const auto& [id, dxc] : secondary_.sharing_offsets()) {
        fields += " dxc_" + std::to_string(id) + "=" + fmt_g17(dxc);
      }
      log(slot, "secondary_step", fields);
    }
  }

  void tertiary_tick(std::uint64_t slot) {
    const auto period =
        static_cast<std::uint64_t>(sched_.config().slots_per_tertiary);
    if (slot > 0 && slot % period == 0) {
      // Opaque payload exchange; anchors the slow-control timeline only.
      log(slot, "tertiary_exchange", "");
    }
  }

  // --------------------------------------------------------------- channel

  void queue_transmission(Side sender, const proto::ProtocolMessage& msg) {
    proto::Bytes wire = msg.serialize();
    if (cfg_.attack && !attack_applied_ && msg.kind == cfg_.attack->target) {
      corrupt_wire(wire, msg.kind, cfg_.attack->mode);
      attack_applied_ = true;
      log(current_slot_, "attack_injected",
          std::string("target=") + proto::kind_name(msg.kind) +
              " mode=" + attack_mode_name(cfg_.attack->mode));
    }
    Transmission tx;
    tx.sender = sender;
    tx.kind = msg.kind;
    const int rep = cfg_.phy.repetition_code ? 3 : 1;
    tx.bits.reserve(wire.size() * 8 * rep);
    for (std::uint8_t byte : wire) {
      for (int b = 7; b >= 0; --b) {
        for (int r = 0; r < rep; ++r) {
          tx.bits.push_back((byte >> b) & 1);
        }
      }
    }
    pending_tx_ = std::move(tx);
  }

  void activate_pending(std::uint64_t slot) {
    if (tx_ || !pending_tx_) return;
    tx_ = std::move(*pending_tx_);
    pending_tx_.reset();
    rx_accum_.reset();
    log(slot, "msg_tx", std::string("kind=") + proto::kind_name(tx_->kind) +
                            " from=" + side_name(tx_->sender) + " slots=" +
                            std::to_string(tx_->bits.size()));
  }

  void calibrate_detectors(std::uint64_t slot) {
    set_detectors_from_model();
    log(slot, "calibrated",
        "thr_cc=" + fmt_g17(cc_tr_.rx_det.threshold) +
            " thr_sta=" + fmt_g17(sta_tr_.rx_det.threshold));
  }

  struct SideDeviations {
    double rx0, rx1;      // peer transmitting, observed at this side
    double self0, self1;  // own transmission, observed at own terminal
  };

  /// Expected level separations at the current operating point, from paired
  /// solves with the transmitter's reference shifted by -gamma / +gamma.
  SideDeviations side_deviations(Side side,
                                 const std::vector<double>& offsets) const {
    const Transceiver& tr = side == Side::kCc ? cc_tr_ : sta_tr_;
    const int peer_unit = (side == Side::kCc ? sta_tr_ : cc_tr_).unit_id;

    const auto dv_pair = [&](int tx_unit, int observed_unit) {
      std::vector<grid::DerUnit> work = units_;
      const std::size_t tx_k = index_of(tx_unit);
      const std::size_t ob_k = index_of(observed_unit);
      const auto value = [&](double gamma) {
        work[tx_k].gamma_offset = gamma;
        const grid::GridSteadyState st =
            grid::solve_steady_state(work, load_, offsets);
        return cfg_.phy.observe == phy::Observe::kBus ? st.v_bus : st.v[ob_k];
      };
      const double base = value(0.0);
      const double lo = value(-cfg_.phy.gamma);
      const double hi = value(+cfg_.phy.gamma);
      return std::pair<double, double>(std::abs(base - lo),
                                       std::abs(hi - base));
    };

    SideDeviations dv{};
    std::tie(dv.rx0, dv.rx1) = dv_pair(peer_unit, tr.unit_id);
    std::tie(dv.self0, dv.self1) = dv_pair(tr.unit_id, tr.unit_id);
    return dv;
  }

  /// Threshold and expected levels from the current operating point. A
  /// converter tracks its settled voltage continuously, so the model value
  /// is what it has already measured before the window.
  void set_detectors_from_model() {
    const std::vector<double> offsets = build_offsets();
    const grid::GridSteadyState base = solve();
    for (Side side : {Side::kCc, Side::kSta}) {
      Transceiver& tr = transceiver(side);
      const SideDeviations dv = side_deviations(side, offsets);
      const double threshold = observed_value(base, side);
      tr.rx_det = phy::make_detector(threshold, dv.rx0, dv.rx1);
      tr.self_det = phy::make_detector(threshold, dv.self0, dv.self1);
    }
  }

  void recalibrate_from_blanks(std::uint64_t slot) {
    const std::vector<double> offsets = build_offsets();
    for (Side side : {Side::kCc, Side::kSta}) {
      Transceiver& tr = transceiver(side);
      const SideDeviations dv = side_deviations(side, offsets);
      tr.rx_det = phy::recalibrate(tr.blanks, cfg_.phy.m_blank, dv.rx0, dv.rx1);
      tr.self_det =
          phy::make_detector(tr.rx_det.threshold, dv.self0, dv.self1);
      tr.blanks.clear();
    }
    ++metrics_.recalibrations;
    log(slot, "recalibrated",
        "thr_cc=" + fmt_g17(cc_tr_.rx_det.threshold) +
            " thr_sta=" + fmt_g17(sta_tr_.rx_det.threshold));
  }

  void process_phy(std::uint64_t slot) {
    activate_pending(slot);

    // Apply the transmitted deviation, if any, then solve the slot.
    bool data_slot = false;
    int tx_bit = -1;
    if (handshake_engaged_ && blanks_remaining_ == 0 && tx_) {
      data_slot = true;
      tx_bit = tx_->bits[tx_->cursor];
      const Transceiver& tr = transceiver(tx_->sender);
      units_[index_of(tr.unit_id)].gamma_offset =
          phy::modulate(tx_bit, cfg_.phy);
    }
    last_state_ = solve();
    // At most one unit deviates in any slot (half duplex).
    int deviating = 0;
    for (const grid::DerUnit& u : units_) {
      if (u.gamma_offset != 0.0) ++deviating;
    }
    if (deviating > 1) {
      throw InvariantViolationError("more than one power talk transmitter "
                                    "active in a slot");
    }
    for (grid::DerUnit& u : units_) u.gamma_offset = 0.0;

    if (!handshake_engaged_) return;

    // Both transceivers sample every engaged slot; CC draws first.
    const phy::SlotObservation obs_cc = phy::sample_slot(
        observed_value(last_state_, Side::kCc), cfg_.phy, cc_tr_.noise, slot);
    const phy::SlotObservation obs_sta = phy::sample_slot(
        observed_value(last_state_, Side::kSta), cfg_.phy, sta_tr_.noise, slot);

    if (blanks_remaining_ > 0) {
      cc_tr_.blanks.push_back(obs_cc);
      sta_tr_.blanks.push_back(obs_sta);
      if (detail_) {
        log(slot, "blank", "remaining=" + std::to_string(blanks_remaining_ - 1));
      }
      if (--blanks_remaining_ == 0) recalibrate_from_blanks(slot);
      return;
    }
    if (!data_slot) return;  // void window: nothing on the air

    const Side rx_side = other(tx_->sender);
    const phy::SlotObservation& obs_tx =
        tx_->sender == Side::kCc ? obs_cc : obs_sta;
    const phy::SlotObservation& obs_rx =
        rx_side == Side::kCc ? obs_cc : obs_sta;

    const bool tx_flag =
        phy::detect_load_change(obs_tx, transceiver(tx_->sender).self_det,
                                cfg_.phy);
    const bool rx_flag =
        phy::detect_load_change(obs_rx, transceiver(rx_side).rx_det, cfg_.phy);
    if (tx_flag || rx_flag) {
      // Pause: this slot's bit is discarded and retransmitted after M blanks.
      log(slot, "load_change_detected",
          std::string("by=") +
              (tx_flag && rx_flag ? "both" : tx_flag ? "tx" : "rx"));
      blanks_remaining_ = cfg_.phy.m_blank;
      cc_tr_.blanks.clear();
      sta_tr_.blanks.clear();
      const std::uint64_t needed =
          static_cast<std::uint64_t>(cfg_.phy.m_blank) + window_remaining_bits_;
      const std::uint64_t added = sched_.ensure_capacity(slot + 1, needed);
      if (added > 0) {
        metrics_.window_extension_slots += added;
        log(slot, "window_extend", "slots=" + std::to_string(added));
      }
      if (cfg_.phy.m_blank == 0) set_detectors_from_model();
      return;
    }

    const int decided = phy::detect(obs_rx, transceiver(rx_side).rx_det);
    if (decided != tx_bit) ++metrics_.bit_errors;
    if (detail_) {
      log(slot, "pt_slot",
          "b=" + std::to_string(tx_bit) + " d=" + std::to_string(decided));
    }
    ++tx_->cursor;
    --window_remaining_bits_;
    deliver_slot_bit(slot, rx_side, decided);
  }

  void deliver_slot_bit(std::uint64_t slot, Side rx_side, int decided) {
    const int rep = cfg_.phy.repetition_code ? 3 : 1;
    rx_accum_.group.push_back(static_cast<std::uint8_t>(decided));
    if (static_cast<int>(rx_accum_.group.size()) < rep) return;
    int ones = 0;
    for (std::uint8_t b : rx_accum_.group) ones += b;
    rx_accum_.group.clear();
    rx_accum_.data_bits.push_back(ones * 2 > rep ? 1 : 0);

    if (!rx_accum_.total_data_bits && rx_accum_.data_bits.size() == 8) {
      std::uint8_t kind_byte = 0;
      for (int k = 0; k < 8; ++k) {
        kind_byte = static_cast<std::uint8_t>((kind_byte << 1) |
                                              rx_accum_.data_bits[k]);
      }
      try {
        rx_accum_.total_data_bits = proto::wire_len_for_kind(kind_byte) * 8;
      } catch (const UnknownKindError&) {
        log(slot, "decode_error", "unknown kind byte");
        abort_handshake(slot, "decode_error");
        return;
      }
    }
    if (!rx_accum_.total_data_bits ||
        rx_accum_.data_bits.size() < *rx_accum_.total_data_bits) {
      return;
    }

    // Full message received.
    proto::ProtocolMessage msg;
    try {
      msg = proto::unframe_bits(rx_accum_.data_bits);
    } catch (const Error&) {
      log(slot, "decode_error", "unparseable message");
      abort_handshake(slot, "decode_error");
      return;
    }
    tx_.reset();
    rx_accum_.reset();
    log(slot, "msg_rx", std::string("kind=") + proto::kind_name(msg.kind) +
                            " by=" + side_name(rx_side));
    deliver_message(slot, rx_side, msg);
  }

  void deliver_message(std::uint64_t slot, Side rx_side,
                       const proto::ProtocolMessage& msg) {
    std::optional<proto::ProtocolMessage> response;
    if (rx_side == Side::kCc) {
      response = cc_->step(msg);
      if (cc_->state() == proto::SessionState::kFailed) {
        abort_handshake(slot, "invalid_tag");
        return;
      }
      if (cc_->pthach_requested()) {
        cc_->clear_pthach_request();
        sched_.open_pthach(slot + 1);
        window_remaining_bits_ =
            proto::handshake_bits(cfg_.phy.repetition_code);
        log(slot, "pthach_allocated",
            "start=" + std::to_string(slot + 1) + " len=" +
                std::to_string(sched_.config().pthach_len_slots()));
      }
    } else {
      response = sta_->step(msg);
      if (sta_->state() == proto::SessionState::kFailed) {
        abort_handshake(slot, "invalid_tag");
        return;
      }
    }

    if (response) {
      queue_transmission(rx_side, *response);
      return;
    }
    // Sender side may have queued follow-ups (Ack then next message).
    const Side sender = other(rx_side);
    auto follow =
        sender == Side::kCc ? cc_->step(std::nullopt) : sta_->step(std::nullopt);
    if (follow) {
      queue_transmission(sender, *follow);
      return;
    }
    maybe_finalize(slot);
  }

  void maybe_finalize(std::uint64_t slot) {
    if (!cc_ || !sta_) return;
    if (cc_->state() == proto::SessionState::kComplete &&
        sta_->state() == proto::SessionState::kComplete) {
      metrics_.handshake_completed = true;
      metrics_.completion_slot = slot;
      metrics_.completion_time_s =
          static_cast<double>(slot - *metrics_.access_slot + 1) * cfg_.phy.t_pt;
      authenticated_.insert(sta_tr_.unit_id);
      secondary_.admit(sta_tr_.unit_id);
      sched_.release(slot);
      handshake_engaged_ = false;
      log(slot, "handshake_complete",
          "slots=" + std::to_string(slot - *metrics_.access_slot + 1) +
              " time_s=" + fmt_g17(*metrics_.completion_time_s));
      log(slot, "auth_granted", "unit=" + std::to_string(sta_tr_.unit_id));
    }
  }

  void abort_handshake(std::uint64_t slot, const std::string& reason) {
    if (sta_) sta_->on_window_closed();
    if (cc_) cc_->on_window_closed();
    sched_.release(slot);
    handshake_engaged_ = false;
    blanks_remaining_ = 0;
    tx_.reset();
    pending_tx_.reset();
    rx_accum_.reset();
    metrics_.handshake_failed = true;
    metrics_.failure_reason = reason;
    log(slot, "handshake_failed", "reason=" + reason);
    // A failed attempt retries from the next PTARCh occurrence with fresh
    // nonces; a once-only corruption does not repeat.
    reset_sessions();
  }

  void maybe_snapshot(std::uint64_t slot) {
    if (slot % static_cast<std::uint64_t>(s_) != 0) return;
    metrics_.trace_t_s.push_back(static_cast<double>(slot) * cfg_.phy.t_pt);
    metrics_.trace_v_bus.push_back(last_state_.v_bus);
    std::vector<double> row;
    row.reserve(trace_ids_.size());
    std::string fields = "v_bus=" + fmt_g17(last_state_.v_bus);
    for (int id : trace_ids_) {
      double current = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t k = 0; k < units_.size(); ++k) {
        if (units_[k].id == id) {
          current = last_state_.i[k];
          break;
        }
      }
      row.push_back(current);
      fields += " i_" + std::to_string(id) + "=" + fmt_g17(current);
    }
    metrics_.trace_currents.push_back(std::move(row));
    if (detail_) log(slot, "snapshot", fields);
  }

  void log(std::uint64_t slot, std::string kind, std::string fields = {}) {
    log_.append(slot, std::move(kind), std::move(fields));
  }

  // ----------------------------------------------------------------- state

  ScenarioConfig cfg_;
  bool detail_;
  std::int64_t s_ = 1;
  std::int64_t duration_ = 0;
  proto::Scheduler sched_;
  control::SecondaryState secondary_;
  std::set<int> authenticated_;

  std::vector<grid::DerUnit> units_;
  grid::LoadModel load_;
  grid::GridSteadyState last_state_;

  Rng rng_load_;
  Rng rng_keys_;
  Transceiver cc_tr_;
  Transceiver sta_tr_;
  std::optional<proto::StaSession> sta_;
  std::optional<proto::CcSession> cc_;

  bool incoming_is_vsc_ = false;
  bool handshake_engaged_ = false;
  bool attack_applied_ = false;
  int blanks_remaining_ = 0;
  std::uint64_t window_remaining_bits_ = 0;
  std::optional<Transmission> tx_;
  std::optional<Transmission> pending_tx_;
  RxAccum rx_accum_;
  std::uint64_t current_slot_ = 0;
  proto::ScheduleWindow::Kind last_window_kind_ =
      proto::ScheduleWindow::Kind::kSecondaryOn;

  std::vector<int> trace_ids_;
  RunMetrics metrics_;
  EventLog log_;
};

}  // namespace

std::string RunMetrics::summary() const {
  std::ostringstream out;
  out << "handshake_attempted: " << (handshake_attempted ? "true" : "false")
      << '\n';
  out << "handshake_completed: " << (handshake_completed ? "true" : "false")
      << '\n';
  out << "handshake_failed: " << (handshake_failed ? "true" : "false") << '\n';
  if (!failure_reason.empty()) out << "failure_reason: " << failure_reason << '\n';
  out << "attempts: " << attempts << '\n';
  if (access_slot) out << "access_slot: " << *access_slot << '\n';
  if (completion_slot) out << "completion_slot: " << *completion_slot << '\n';
  if (completion_time_s) {
    out << "completion_time_s: " << fmt_g17(*completion_time_s) << '\n';
  }
  out << "bit_errors: " << bit_errors << '\n';
  out << "load_changes: " << load_changes << '\n';
  out << "recalibrations: " << recalibrations << '\n';
  out << "window_extension_slots: " << window_extension_slots << '\n';
  out << "cc_keys_installed: " << (cc_keys_installed ? "true" : "false")
      << '\n';
  out << "sta_keys_installed: " << (sta_keys_installed ? "true" : "false")
      << '\n';
  if (!trace_v_bus.empty()) {
    out << "final_v_bus: " << fmt_g17(trace_v_bus.back()) << '\n';
  }
  return out.str();
}

RunResult run(const ScenarioConfig& config, bool record_detail) {
  Engine engine(config, record_detail);
  return engine.run();
}

MuEstimate estimate_mu(const ScenarioConfig& config, std::uint64_t n_runs,
                       std::uint64_t seed, int workers) {
  std::vector<std::optional<double>> times(n_runs);
  const int n_workers =
      std::max(1, std::min<int>(workers, static_cast<int>(n_runs)));

  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= n_runs) break;
      ScenarioConfig cfg = config;
      cfg.seed = derive_seed(seed, 0x6d75, k);
      const RunResult result = run(cfg, /*record_detail=*/false);
      if (result.metrics.handshake_completed) {
        times[k] = result.metrics.completion_time_s;
      }
    }
  };

  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  MuEstimate est;
  est.runs = n_runs;
  for (const auto& t : times) {
    if (t) {
      est.completion_times_s.push_back(*t);
      ++est.completed;
    }
  }
  if (est.completed > 0) {
    double sum = 0.0;
    for (double t : est.completion_times_s) sum += t;
    est.mean_s = sum / static_cast<double>(est.completed);
    if (est.completed > 1) {
      double ss = 0.0;
      for (double t : est.completion_times_s) {
        ss += (t - est.mean_s) * (t - est.mean_s);
      }
      est.stderr_s = std::sqrt(ss / static_cast<double>(est.completed - 1) /
                               static_cast<double>(est.completed));
    }
  }
  return est;
}

}  // namespace powertalk::sim
