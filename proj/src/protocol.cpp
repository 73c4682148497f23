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
#include "powertalk/protocol.hpp"

#include <algorithm>
#include <cstring>

#include "powertalk/errors.hpp"

namespace powertalk::proto {

namespace {

constexpr std::size_t kHeaderLen = 3;  // kind + 2-byte body length
constexpr std::size_t kTagLen = 16;
constexpr std::size_t kNonceLen = 32;
constexpr std::size_t kMacLen = 6;
constexpr std::size_t kGtkLen = 32;

Bytes span_to_bytes(std::span<const std::uint8_t> s) {
  return Bytes(s.begin(), s.end());
}

}  // namespace

const char* kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::kAssocRequest: return "assoc_request";
    case MessageKind::kAssocResponse: return "assoc_response";
    case MessageKind::kH1: return "h1";
    case MessageKind::kH2: return "h2";
    case MessageKind::kH3: return "h3";
    case MessageKind::kH4: return "h4";
    case MessageKind::kAck: return "ack";
  }
  return "unknown";
}

std::size_t declared_len(MessageKind kind) {
  switch (kind) {
    case MessageKind::kAssocRequest: return 114;
    case MessageKind::kAssocResponse: return 93;
    case MessageKind::kH1: return 177;
    case MessageKind::kH2: return 177;
    case MessageKind::kH3: return 211;
    case MessageKind::kH4: return 155;
    case MessageKind::kAck: return 32;
  }
  throw UnknownKindError("unknown message kind");
}

std::size_t wire_len_for_kind(std::uint8_t kind_byte) {
  if (kind_byte < 1 || kind_byte > 7) {
    throw UnknownKindError("unknown kind byte " + std::to_string(kind_byte));
  }
  return declared_len(static_cast<MessageKind>(kind_byte));
}

Bytes ProtocolMessage::serialize() const {
  const std::size_t total = declared_len(kind);
  if (kHeaderLen + body.size() > total) {
    throw LengthMismatchError("body of " + std::string(kind_name(kind)) +
                              " exceeds its declared length");
  }
  Bytes wire(total, 0);
  wire[0] = static_cast<std::uint8_t>(kind);
  wire[1] = static_cast<std::uint8_t>(body.size() >> 8);
  wire[2] = static_cast<std::uint8_t>(body.size() & 0xff);
  std::copy(body.begin(), body.end(), wire.begin() + kHeaderLen);
  return wire;
}

ProtocolMessage ProtocolMessage::parse(std::span<const std::uint8_t> wire) {
  if (wire.empty()) throw LengthMismatchError("empty wire message");
  const std::size_t expected = wire_len_for_kind(wire[0]);
  if (wire.size() != expected) {
    throw LengthMismatchError("wire length " + std::to_string(wire.size()) +
                              " does not match declared length " +
                              std::to_string(expected));
  }
  const std::size_t body_len =
      (static_cast<std::size_t>(wire[1]) << 8) | wire[2];
  if (kHeaderLen + body_len > expected) {
    throw LengthMismatchError("body length field exceeds declared length");
  }
  ProtocolMessage msg;
  msg.kind = static_cast<MessageKind>(wire[0]);
  msg.body.assign(wire.begin() + kHeaderLen,
                  wire.begin() + kHeaderLen + body_len);
  return msg;
}

std::vector<std::uint8_t> frame_bits(const ProtocolMessage& msg) {
  const Bytes wire = msg.serialize();
  std::vector<std::uint8_t> bits;
  bits.reserve(wire.size() * 8);
  for (std::uint8_t byte : wire) {
    for (int b = 7; b >= 0; --b) {
      bits.push_back((byte >> b) & 1);
    }
  }
  return bits;
}

ProtocolMessage unframe_bits(std::span<const std::uint8_t> bits) {
  if (bits.size() % 8 != 0) {
    throw LengthMismatchError("bit stream is not byte aligned");
  }
  Bytes wire(bits.size() / 8, 0);
  for (std::size_t k = 0; k < bits.size(); ++k) {
    wire[k / 8] = static_cast<std::uint8_t>((wire[k / 8] << 1) | (bits[k] & 1));
  }
  if (wire.empty()) throw LengthMismatchError("empty bit stream");
  const std::size_t expected = wire_len_for_kind(wire[0]);
  if (wire.size() != expected) {
    throw LengthMismatchError("bit stream carries " +
                              std::to_string(wire.size()) + " bytes, kind " +
                              "declares " + std::to_string(expected));
  }
  return ProtocolMessage::parse(wire);
}

// --------------------------------------------------------------------------
// Message builders / field layout
// --------------------------------------------------------------------------

ProtocolMessage make_assoc_request(std::span<const std::uint8_t> sta_mac) {
  ProtocolMessage m;
  m.kind = MessageKind::kAssocRequest;
  m.body = span_to_bytes(sta_mac.first(kMacLen));
  return m;
}

ProtocolMessage make_assoc_response(std::span<const std::uint8_t> cc_mac,
                                    std::uint8_t status) {
  ProtocolMessage m;
  m.kind = MessageKind::kAssocResponse;
  m.body = span_to_bytes(cc_mac.first(kMacLen));
  m.body.push_back(status);
  return m;
}

ProtocolMessage make_h1(std::span<const std::uint8_t> cc_mac,
                        std::span<const std::uint8_t> anonce) {
  ProtocolMessage m;
  m.kind = MessageKind::kH1;
  m.body = span_to_bytes(cc_mac.first(kMacLen));
  m.body.insert(m.body.end(), anonce.begin(), anonce.begin() + kNonceLen);
  return m;
}

Bytes message_tag(MessageKind kind, std::span<const std::uint8_t> body_zeroed,
                  std::span<const std::uint8_t> kck) {
  Bytes data;
  data.push_back(static_cast<std::uint8_t>(kind));
  data.insert(data.end(), body_zeroed.begin(), body_zeroed.end());
  Bytes mac = hmac_sha256(kck, data);
  mac.resize(kTagLen);
  return mac;
}

namespace {

/// Appends the tag computed over the body-so-far plus kTagLen zero bytes.
void append_tag(ProtocolMessage& m, std::span<const std::uint8_t> kck) {
  Bytes zeroed = m.body;
  zeroed.insert(zeroed.end(), kTagLen, 0);
  const Bytes tag = message_tag(m.kind, zeroed, kck);
  m.body.insert(m.body.end(), tag.begin(), tag.end());
}

bool check_tag(const ProtocolMessage& m, std::span<const std::uint8_t> kck,
               std::size_t expected_body_len) {
  if (m.body.size() != expected_body_len) return false;
  Bytes zeroed = m.body;
  std::fill(zeroed.end() - kTagLen, zeroed.end(), 0);
  const Bytes want = message_tag(m.kind, zeroed, kck);
  return std::equal(want.begin(), want.end(), m.body.end() - kTagLen);
}

Bytes gtk_keystream(std::span<const std::uint8_t> kek) {
  return prf_expand(kek, "group key wrap", {}, kGtkLen);
}

}  // namespace

ProtocolMessage make_h2(std::span<const std::uint8_t> sta_mac,
                        std::span<const std::uint8_t> snonce,
                        std::span<const std::uint8_t> kck) {
  ProtocolMessage m;
  m.kind = MessageKind::kH2;
  m.body = span_to_bytes(sta_mac.first(kMacLen));
  m.body.insert(m.body.end(), snonce.begin(), snonce.begin() + kNonceLen);
  append_tag(m, kck);
  return m;
}

ProtocolMessage make_h3(std::span<const std::uint8_t> gtk,
                        std::span<const std::uint8_t> kck,
                        std::span<const std::uint8_t> kek) {
  ProtocolMessage m;
  m.kind = MessageKind::kH3;
  const Bytes ks = gtk_keystream(kek);
  for (std::size_t k = 0; k < kGtkLen; ++k) {
    m.body.push_back(gtk[k] ^ ks[k]);
  }
  append_tag(m, kck);
  return m;
}

ProtocolMessage make_h4(std::span<const std::uint8_t> kck) {
  ProtocolMessage m;
  m.kind = MessageKind::kH4;
  append_tag(m, kck);
  return m;
}

ProtocolMessage make_ack(MessageKind acked) {
  ProtocolMessage m;
  m.kind = MessageKind::kAck;
  m.body.push_back(static_cast<std::uint8_t>(acked));
  return m;
}

bool verify_h2(const ProtocolMessage& h2, std::span<const std::uint8_t> kck) {
  return h2.kind == MessageKind::kH2 &&
         check_tag(h2, kck, kMacLen + kNonceLen + kTagLen);
}

bool verify_h3(const ProtocolMessage& h3, std::span<const std::uint8_t> kck) {
  return h3.kind == MessageKind::kH3 && check_tag(h3, kck, kGtkLen + kTagLen);
}

bool verify_h4(const ProtocolMessage& h4, std::span<const std::uint8_t> kck) {
  return h4.kind == MessageKind::kH4 && check_tag(h4, kck, kTagLen);
}

Bytes unwrap_gtk(const ProtocolMessage& h3, std::span<const std::uint8_t> kek) {
  if (h3.body.size() < kGtkLen) {
    throw LengthMismatchError("h3 body too short for a group key");
  }
  const Bytes ks = gtk_keystream(kek);
  Bytes gtk(kGtkLen);
  for (std::size_t k = 0; k < kGtkLen; ++k) {
    gtk[k] = h3.body[k] ^ ks[k];
  }
  return gtk;
}

Ptk derive_ptk(std::span<const std::uint8_t> pmk,
               std::span<const std::uint8_t> anonce,
               std::span<const std::uint8_t> snonce,
               std::span<const std::uint8_t> sta_mac,
               std::span<const std::uint8_t> cc_mac) {
  const Bytes a = span_to_bytes(sta_mac.first(kMacLen));
  const Bytes b = span_to_bytes(cc_mac.first(kMacLen));
  const Bytes na = span_to_bytes(anonce.first(kNonceLen));
  const Bytes nb = span_to_bytes(snonce.first(kNonceLen));

  Bytes context;
  const bool mac_order = std::lexicographical_compare(a.begin(), a.end(),
                                                      b.begin(), b.end());
  const Bytes& mac_lo = mac_order ? a : b;
  const Bytes& mac_hi = mac_order ? b : a;
  const bool nonce_order = std::lexicographical_compare(na.begin(), na.end(),
                                                        nb.begin(), nb.end());
  const Bytes& nonce_lo = nonce_order ? na : nb;
  const Bytes& nonce_hi = nonce_order ? nb : na;
  context.insert(context.end(), mac_lo.begin(), mac_lo.end());
  context.insert(context.end(), mac_hi.begin(), mac_hi.end());
  context.insert(context.end(), nonce_lo.begin(), nonce_lo.end());
  context.insert(context.end(), nonce_hi.begin(), nonce_hi.end());

  const Bytes raw = prf_expand(pmk, "pairwise key expansion", context, 32);
  Ptk ptk;
  std::copy(raw.begin(), raw.begin() + 16, ptk.kck.begin());
  std::copy(raw.begin() + 16, raw.end(), ptk.kek.begin());
  return ptk;
}

// --------------------------------------------------------------------------
// Sessions
// --------------------------------------------------------------------------

const char* state_name(SessionState s) {
  switch (s) {
    case SessionState::kIdle: return "idle";
    case SessionState::kAssocSent: return "assoc_sent";
    case SessionState::kAssocDone: return "assoc_done";
    case SessionState::kH1Sent: return "h1_sent";
    case SessionState::kH2Sent: return "h2_sent";
    case SessionState::kH3Sent: return "h3_sent";
    case SessionState::kH3Rcvd: return "h3_rcvd";
    case SessionState::kComplete: return "complete";
    case SessionState::kFailed: return "failed";
  }
  return "unknown";
}

StaSession::StaSession(Bytes pmk, std::array<std::uint8_t, 6> sta_mac,
                       std::array<std::uint8_t, 32> snonce, LogFn log)
    : pmk_(std::move(pmk)), sta_mac_(sta_mac), snonce_(snonce),
      log_(std::move(log)) {}

void StaSession::log(const std::string& msg) {
  if (log_) log_("sta " + msg);
}

void StaSession::fail(const std::string& why) {
  log("receipt logged, session failed: " + why);
  state_ = SessionState::kFailed;
  outbox_.clear();
}

void StaSession::on_ptarch_open() {
  if (state_ != SessionState::kIdle) return;
  outbox_.push_back(make_assoc_request(sta_mac_));
  state_ = SessionState::kAssocSent;
}

void StaSession::on_window_closed() {
  if (state_ != SessionState::kComplete && state_ != SessionState::kIdle) {
    fail("window closed before completion");
  }
}

std::optional<ProtocolMessage> StaSession::step(
    const std::optional<ProtocolMessage>& incoming) {
  if (state_ == SessionState::kFailed) return std::nullopt;

  if (incoming) {
    const ProtocolMessage& msg = *incoming;
    switch (msg.kind) {
      case MessageKind::kAck:
        if (state_ == SessionState::kH3Rcvd && !msg.body.empty() &&
            msg.body[0] == static_cast<std::uint8_t>(MessageKind::kH4)) {
          keys_installed_ = true;
          state_ = SessionState::kComplete;
          log("h4 acknowledged, keys installed, complete");
        }
        break;
      case MessageKind::kAssocResponse:
        if (state_ == SessionState::kAssocSent) {
          std::copy(msg.body.begin(), msg.body.begin() + 6, cc_mac_.begin());
          outbox_.push_back(make_ack(MessageKind::kAssocResponse));
          state_ = SessionState::kAssocDone;
        } else {
          log("unexpected assoc_response ignored");
        }
        break;
      case MessageKind::kH1:
        if (state_ == SessionState::kAssocDone) {
          std::copy(msg.body.begin(), msg.body.begin() + 6, cc_mac_.begin());
          std::copy(msg.body.begin() + 6, msg.body.begin() + 38,
                    anonce_.begin());
          ptk_ = derive_ptk(pmk_, anonce_, snonce_, sta_mac_, cc_mac_);
          outbox_.push_back(make_ack(MessageKind::kH1));
          outbox_.push_back(make_h2(sta_mac_, snonce_, ptk_->kck));
          state_ = SessionState::kH2Sent;
        } else {
          log("unexpected h1 ignored");
        }
        break;
      case MessageKind::kH3:
        if (state_ == SessionState::kH2Sent) {
          if (!ptk_ || !verify_h3(msg, ptk_->kck)) {
            fail("h3 confirmation tag invalid");
            break;
          }
          gtk_ = unwrap_gtk(msg, ptk_->kek);
          outbox_.push_back(make_ack(MessageKind::kH3));
          outbox_.push_back(make_h4(ptk_->kck));
          state_ = SessionState::kH3Rcvd;
        } else {
          log("unexpected h3 ignored");
        }
        break;
      default:
        log(std::string("unexpected ") + kind_name(msg.kind) + " ignored");
        break;
    }
  }

  if (state_ != SessionState::kFailed && !outbox_.empty()) {
    ProtocolMessage out = outbox_.front();
    outbox_.pop_front();
    return out;
  }
  return std::nullopt;
}

CcSession::CcSession(Bytes sta_pmk, std::array<std::uint8_t, 6> cc_mac,
                     std::array<std::uint8_t, 32> anonce, Bytes gtk, LogFn log)
    : sta_pmk_(std::move(sta_pmk)), cc_mac_(cc_mac), anonce_(anonce),
      gtk_(std::move(gtk)), log_(std::move(log)) {}

void CcSession::log(const std::string& msg) {
  if (log_) log_("cc " + msg);
}

void CcSession::fail(const std::string& why) {
  log("receipt logged, session failed: " + why);
  state_ = SessionState::kFailed;
  outbox_.clear();
}

void CcSession::on_window_closed() {
  if (state_ != SessionState::kComplete && state_ != SessionState::kIdle) {
    fail("window closed before completion");
  }
}

std::optional<ProtocolMessage> CcSession::step(
    const std::optional<ProtocolMessage>& incoming) {
  if (state_ == SessionState::kFailed) return std::nullopt;

  if (incoming) {
    const ProtocolMessage& msg = *incoming;
    switch (msg.kind) {
      case MessageKind::kAssocRequest:
        if (state_ == SessionState::kIdle) {
          std::copy(msg.body.begin(), msg.body.begin() + 6, sta_mac_.begin());
          outbox_.push_back(make_ack(MessageKind::kAssocRequest));
          outbox_.push_back(make_assoc_response(cc_mac_, 0));
          state_ = SessionState::kAssocDone;
        } else {
          log("unexpected assoc_request ignored");
        }
        break;
      case MessageKind::kAck:
        if (state_ == SessionState::kAssocDone && !msg.body.empty() &&
            msg.body[0] ==
                static_cast<std::uint8_t>(MessageKind::kAssocResponse)) {
          pthach_requested_ = true;
          outbox_.push_back(make_h1(cc_mac_, anonce_));
          state_ = SessionState::kH1Sent;
        }
        break;
      case MessageKind::kH2:
        if (state_ == SessionState::kH1Sent) {
          if (msg.body.size() >= 38) {
            std::copy(msg.body.begin() + 6, msg.body.begin() + 38,
                      snonce_.begin());
          }
          ptk_ = derive_ptk(sta_pmk_, anonce_, snonce_, sta_mac_, cc_mac_);
          if (!verify_h2(msg, ptk_->kck)) {
            fail("h2 confirmation tag invalid");
            break;
          }
          outbox_.push_back(make_ack(MessageKind::kH2));
          outbox_.push_back(make_h3(gtk_, ptk_->kck, ptk_->kek));
          state_ = SessionState::kH3Sent;
        } else {
          log("unexpected h2 ignored");
        }
        break;
      case MessageKind::kH4:
        if (state_ == SessionState::kH3Sent) {
          if (!ptk_ || !verify_h4(msg, ptk_->kck)) {
            fail("h4 confirmation tag invalid");
            break;
          }
          outbox_.push_back(make_ack(MessageKind::kH4));
          keys_installed_ = true;
          granted_ = true;
          state_ = SessionState::kComplete;
          log("h4 verified, keys registered, authentication granted");
        } else {
          log("unexpected h4 ignored");
        }
        break;
      default:
        log(std::string("unexpected ") + kind_name(msg.kind) + " ignored");
        break;
    }
  }

  if (state_ != SessionState::kFailed && !outbox_.empty()) {
    ProtocolMessage out = outbox_.front();
    outbox_.pop_front();
    return out;
  }
  return std::nullopt;
}

// --------------------------------------------------------------------------
// Schedule
// --------------------------------------------------------------------------

namespace {
std::size_t repetition_factor(bool repetition_code) {
  return repetition_code ? 3 : 1;
}
}  // namespace

std::size_t assoc_exchange_bits(bool repetition_code) {
  const std::size_t bytes = declared_len(MessageKind::kAssocRequest) +
                            declared_len(MessageKind::kAck) +
                            declared_len(MessageKind::kAssocResponse) +
                            declared_len(MessageKind::kAck);
  return 8 * bytes * repetition_factor(repetition_code);
}

std::size_t handshake_bits(bool repetition_code) {
  const std::size_t bytes =
      declared_len(MessageKind::kH1) + declared_len(MessageKind::kH2) +
      declared_len(MessageKind::kH3) + declared_len(MessageKind::kH4) +
      4 * declared_len(MessageKind::kAck);
  return 8 * bytes * repetition_factor(repetition_code);
}

std::size_t total_exchange_bits(bool repetition_code) {
  return assoc_exchange_bits(repetition_code) + handshake_bits(repetition_code);
}

std::int64_t min_d_periods(std::int64_t s_slots, bool repetition_code) {
  const auto bits = static_cast<std::int64_t>(assoc_exchange_bits(repetition_code));
  return (bits + s_slots - 1) / s_slots;
}

std::int64_t min_r_periods(std::int64_t s_slots, bool repetition_code) {
  const auto bits = static_cast<std::int64_t>(handshake_bits(repetition_code));
  return (bits + s_slots - 1) / s_slots;
}

void SchedulerConfig::validate() const {
  if (s_slots < 1) throw ConfigError("protocol.s_slots", "must be >= 1");
  if (d_periods < 1) throw ConfigError("protocol.d_periods", "must be >= 1");
  if (r_periods < 1) throw ConfigError("protocol.r_periods", "must be >= 1");
  if (l_per_tertiary < 1) {
    throw ConfigError("protocol.l_per_tertiary", "must be >= 1");
  }
  if (slots_per_tertiary < 1) {
    throw ConfigError("protocol.t_tc", "tertiary period must cover at least "
                                       "one slot");
  }
  if (slots_per_tertiary % l_per_tertiary != 0) {
    throw ConfigError("protocol.l_per_tertiary",
                      "must divide the tertiary period slot count");
  }
  if (ptarch_period_slots() % s_slots != 0) {
    throw ConfigError("protocol.t_tc",
                      "PTARCh period must be a whole number of secondary "
                      "periods");
  }
  if (ptarch_offset_slots < 0 || ptarch_offset_slots % s_slots != 0) {
    throw ConfigError("protocol.ptarch_offset",
                      "must be a non-negative whole number of secondary "
                      "periods");
  }
  if (ptarch_len_slots() >= ptarch_period_slots()) {
    throw ConfigError("protocol.d_periods",
                      "PTARCh must be shorter than its recurrence period");
  }
  if (ptarch_len_slots() <
      static_cast<std::int64_t>(assoc_exchange_bits(repetition_code))) {
    throw ConfigError("protocol.d_periods",
                      "PTARCh cannot fit the association exchange (" +
                          std::to_string(assoc_exchange_bits(repetition_code)) +
                          " bits at 1 bit per slot)");
  }
  if (pthach_len_slots() <
      static_cast<std::int64_t>(handshake_bits(repetition_code))) {
    throw ConfigError("protocol.r_periods",
                      "PTHaCh cannot fit the four-way handshake (" +
                          std::to_string(handshake_bits(repetition_code)) +
                          " bits at 1 bit per slot)");
  }
}

Scheduler::Scheduler(SchedulerConfig config) : cfg_(config) {
  cfg_.validate();
}

std::uint64_t Scheduler::next_ptarch_start(std::uint64_t slot) const {
  const auto offset = static_cast<std::uint64_t>(cfg_.ptarch_offset_slots);
  const auto period = static_cast<std::uint64_t>(cfg_.ptarch_period_slots());
  std::uint64_t floor = std::max(slot, resume_floor_);
  if (active_) floor = std::max(floor, active_->end_slot());
  if (floor <= offset) return offset;
  const std::uint64_t k = (floor - offset + period - 1) / period;
  return offset + k * period;
}

ScheduleWindow Scheduler::window_at(std::uint64_t slot) const {
  if (active_ && slot >= active_->start_slot && slot < active_->end_slot()) {
    return *active_;
  }
  const auto offset = static_cast<std::uint64_t>(cfg_.ptarch_offset_slots);
  const auto period = static_cast<std::uint64_t>(cfg_.ptarch_period_slots());
  const auto len = static_cast<std::uint64_t>(cfg_.ptarch_len_slots());
  if (slot >= offset) {
    const std::uint64_t k = (slot - offset) / period;
    const std::uint64_t occ_start = offset + k * period;
    if (slot < occ_start + len && occ_start >= resume_floor_ &&
        (!active_ || occ_start >= active_->end_slot())) {
      return ScheduleWindow{ScheduleWindow::Kind::kPtarch, occ_start, len};
    }
  }
  ScheduleWindow on;
  on.kind = ScheduleWindow::Kind::kSecondaryOn;
  on.start_slot = slot;
  on.length_slots = next_ptarch_start(slot) - slot;
  return on;
}

void Scheduler::use_ptarch(std::uint64_t slot) {
  const ScheduleWindow w = window_at(slot);
  if (w.kind != ScheduleWindow::Kind::kPtarch) {
    throw InvariantViolationError("no PTARCh occurrence covers slot " +
                                  std::to_string(slot));
  }
  active_ = w;
}

void Scheduler::open_pthach(std::uint64_t start) {
  active_ = ScheduleWindow{ScheduleWindow::Kind::kPthach, start,
                           static_cast<std::uint64_t>(cfg_.pthach_len_slots())};
}

std::uint64_t Scheduler::ensure_capacity(std::uint64_t now,
                                         std::uint64_t needed_slots) {
  if (!active_) return 0;
  std::uint64_t added = 0;
  const auto s = static_cast<std::uint64_t>(cfg_.s_slots);
  while (active_->end_slot() < now + needed_slots) {
    active_->length_slots += s;
    added += s;
  }
  return added;
}

void Scheduler::release(std::uint64_t slot) {
  resume_floor_ = std::max(resume_floor_, slot + 1);
  active_.reset();
}

}  // namespace powertalk::proto
