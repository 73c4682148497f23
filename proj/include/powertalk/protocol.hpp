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

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "powertalk/prf.hpp"

namespace powertalk::proto {

// ---------------------------------------------------------------------------
// Messages and wire format
// ---------------------------------------------------------------------------

enum class MessageKind : std::uint8_t {
  kAssocRequest = 1,
  kAssocResponse = 2,
  kH1 = 3,
  kH2 = 4,
  kH3 = 5,
  kH4 = 6,
  kAck = 7,
};

const char* kind_name(MessageKind kind);

/// Fixed on-air length per message kind, in bytes.
std::size_t declared_len(MessageKind kind);

/// Structured message content. On the wire every message is
///   kind (1 byte) | body length (2 bytes, big-endian) | body | zero padding
/// padded to declared_len(kind) bytes; the framing bit count per message is
/// always 8 * declared_len.
struct ProtocolMessage {
  MessageKind kind = MessageKind::kAck;
  Bytes body;

  Bytes serialize() const;  // throws LengthMismatchError if body too long
  static ProtocolMessage parse(std::span<const std::uint8_t> wire);

  bool operator==(const ProtocolMessage&) const = default;
};

/// Serialized message as a flat bit sequence, one entry per power talk slot
/// (MSB first within each byte).
std::vector<std::uint8_t> frame_bits(const ProtocolMessage& msg);
ProtocolMessage unframe_bits(std::span<const std::uint8_t> bits);

/// Wire length (in bytes) implied by a message's leading kind byte.
std::size_t wire_len_for_kind(std::uint8_t kind_byte);

// Field accessors for the structured bodies. Offsets are fixed per kind.
ProtocolMessage make_assoc_request(std::span<const std::uint8_t> sta_mac);
ProtocolMessage make_assoc_response(std::span<const std::uint8_t> cc_mac,
                                    std::uint8_t status);
ProtocolMessage make_h1(std::span<const std::uint8_t> cc_mac,
                        std::span<const std::uint8_t> anonce);
ProtocolMessage make_h2(std::span<const std::uint8_t> sta_mac,
                        std::span<const std::uint8_t> snonce,
                        std::span<const std::uint8_t> kck);
ProtocolMessage make_h3(std::span<const std::uint8_t> gtk,
                        std::span<const std::uint8_t> kck,
                        std::span<const std::uint8_t> kek);
ProtocolMessage make_h4(std::span<const std::uint8_t> kck);
ProtocolMessage make_ack(MessageKind acked);

// ---------------------------------------------------------------------------
// Key derivation
// ---------------------------------------------------------------------------

/// Pairwise transient key: confirmation half authenticates handshake
/// messages, encryption half wraps the group key in h3.
struct Ptk {
  std::array<std::uint8_t, 16> kck{};  // confirmation key
  std::array<std::uint8_t, 16> kek{};  // encryption key
};

/// Deterministic expansion of the master key over the unordered
/// (mac, mac, nonce, nonce) tuple; both sides derive the same key.
Ptk derive_ptk(std::span<const std::uint8_t> pmk,
               std::span<const std::uint8_t> anonce,
               std::span<const std::uint8_t> snonce,
               std::span<const std::uint8_t> sta_mac,
               std::span<const std::uint8_t> cc_mac);

/// Message authentication tag (16 bytes) over kind byte + body with the tag
/// field zeroed, keyed by the confirmation key.
Bytes message_tag(MessageKind kind, std::span<const std::uint8_t> body_zeroed,
                  std::span<const std::uint8_t> kck);

bool verify_h2(const ProtocolMessage& h2, std::span<const std::uint8_t> kck);
bool verify_h3(const ProtocolMessage& h3, std::span<const std::uint8_t> kck);
bool verify_h4(const ProtocolMessage& h4, std::span<const std::uint8_t> kck);
Bytes unwrap_gtk(const ProtocolMessage& h3, std::span<const std::uint8_t> kek);

// ---------------------------------------------------------------------------
// Handshake sessions
// ---------------------------------------------------------------------------

enum class SessionState {
  kIdle,
  kAssocSent,
  kAssocDone,
  kH1Sent,
  kH2Sent,
  kH3Sent,
  kH3Rcvd,
  kComplete,
  kFailed,
};

const char* state_name(SessionState s);

using LogFn = std::function<void(const std::string&)>;

/// Station (incoming DER) side of the association + four-way handshake.
///
/// step(incoming) consumes at most one fully received message and returns at
/// most one message to transmit; the engine calls step(nullopt) again once
/// the channel is idle to drain queued responses. Every received non-Ack
/// message is acknowledged before the next protocol message goes out. A
/// failed tag check logs a framing receipt, enters kFailed and transmits
/// nothing further.
class StaSession {
 public:
  StaSession(Bytes pmk, std::array<std::uint8_t, 6> sta_mac,
             std::array<std::uint8_t, 32> snonce, LogFn log = {});

  /// The PTARCh is open: queue the association request.
  void on_ptarch_open();

  std::optional<ProtocolMessage> step(
      const std::optional<ProtocolMessage>& incoming);

  /// The window was withdrawn before completion.
  void on_window_closed();

  SessionState state() const { return state_; }
  bool keys_installed() const { return keys_installed_; }
  bool has_gtk() const { return !gtk_.empty(); }
  const std::optional<Ptk>& ptk() const { return ptk_; }
  bool outbox_empty() const { return outbox_.empty(); }

 private:
  void fail(const std::string& why);
  void log(const std::string& msg);

  Bytes pmk_;
  std::array<std::uint8_t, 6> sta_mac_;
  std::array<std::uint8_t, 6> cc_mac_{};
  std::array<std::uint8_t, 32> snonce_;
  std::array<std::uint8_t, 32> anonce_{};
  std::optional<Ptk> ptk_;
  Bytes gtk_;
  bool keys_installed_ = false;
  SessionState state_ = SessionState::kIdle;
  std::deque<ProtocolMessage> outbox_;
  LogFn log_;
};

/// Central controller side. Holds the expected master key for the station,
/// generates the ANonce and the group key, and reports when the handshake
/// outcome should be signalled to the control plane.
class CcSession {
 public:
  CcSession(Bytes sta_pmk, std::array<std::uint8_t, 6> cc_mac,
            std::array<std::uint8_t, 32> anonce, Bytes gtk, LogFn log = {});

  std::optional<ProtocolMessage> step(
      const std::optional<ProtocolMessage>& incoming);

  void on_window_closed();

  SessionState state() const { return state_; }
  /// True exactly once the handshake completed and keys were registered.
  bool authentication_granted() const { return granted_; }
  bool keys_installed() const { return keys_installed_; }
  /// Set when the acknowledged association exchange asks for a PTHaCh.
  bool pthach_requested() const { return pthach_requested_; }
  void clear_pthach_request() { pthach_requested_ = false; }
  const std::optional<Ptk>& ptk() const { return ptk_; }
  bool outbox_empty() const { return outbox_.empty(); }

 private:
  void fail(const std::string& why);
  void log(const std::string& msg);

  Bytes sta_pmk_;
  std::array<std::uint8_t, 6> cc_mac_;
  std::array<std::uint8_t, 6> sta_mac_{};
  std::array<std::uint8_t, 32> anonce_;
  std::array<std::uint8_t, 32> snonce_{};
  Bytes gtk_;
  std::optional<Ptk> ptk_;
  bool keys_installed_ = false;
  bool granted_ = false;
  bool pthach_requested_ = false;
  SessionState state_ = SessionState::kIdle;
  std::deque<ProtocolMessage> outbox_;
  LogFn log_;
};

// ---------------------------------------------------------------------------
// Slot schedule
// ---------------------------------------------------------------------------

/// Bit budget of the acknowledged association exchange
/// (AssocRequest + Ack + AssocResponse + Ack) at 1 bit per slot.
std::size_t assoc_exchange_bits(bool repetition_code = false);
/// Bit budget of h1..h4 plus their Acks.
std::size_t handshake_bits(bool repetition_code = false);
/// Whole handshake from PTARCh access to the final Ack.
std::size_t total_exchange_bits(bool repetition_code = false);

/// Smallest D / R (in secondary periods of s_slots slots) that fit the
/// association exchange / the four-way handshake.
std::int64_t min_d_periods(std::int64_t s_slots, bool repetition_code = false);
std::int64_t min_r_periods(std::int64_t s_slots, bool repetition_code = false);

struct SchedulerConfig {
  std::int64_t d_periods = 0;  // PTARCh length [secondary periods]
  std::int64_t r_periods = 0;  // PTHaCh length [secondary periods]
  std::int64_t l_per_tertiary = 1;
  std::int64_t s_slots = 1;               // slots per secondary period
  std::int64_t slots_per_tertiary = 0;    // T^tc / T^pt
  std::int64_t ptarch_offset_slots = 0;   // first occurrence
  bool repetition_code = false;

  std::int64_t ptarch_period_slots() const {
    return slots_per_tertiary / l_per_tertiary;
  }
  std::int64_t ptarch_len_slots() const { return d_periods * s_slots; }
  std::int64_t pthach_len_slots() const { return r_periods * s_slots; }

  void validate() const;  // throws ConfigError
};

struct ScheduleWindow {
  enum class Kind { kPtarch, kPthach, kSecondaryOn };
  Kind kind = Kind::kSecondaryOn;
  std::uint64_t start_slot = 0;
  std::uint64_t length_slots = 0;

  std::uint64_t end_slot() const { return start_slot + length_slots; }
};

/// Slot-granular window bookkeeping. PTARCh occurrences recur every
/// T^tc/L slots; an on-demand PTHaCh replaces the schedule after an
/// acknowledged association exchange and may be extended by whole secondary
/// periods when blank-slot recalibration consumes budget. Secondary control
/// is on exactly when no window is active.
class Scheduler {
 public:
  explicit Scheduler(SchedulerConfig config);

  ScheduleWindow window_at(std::uint64_t slot) const;
  bool secondary_enabled(std::uint64_t slot) const {
    return window_at(slot).kind == ScheduleWindow::Kind::kSecondaryOn;
  }

  /// First PTARCh occurrence starting at or after `slot`.
  std::uint64_t next_ptarch_start(std::uint64_t slot) const;

  /// Pins the PTARCh occurrence containing `slot` as the active window.
  void use_ptarch(std::uint64_t slot);
  /// Allocates the on-demand handshake window starting at `start`.
  void open_pthach(std::uint64_t start);
  /// Extends the active window by whole secondary periods until at least
  /// `needed_slots` remain after `now`; returns the number of slots added.
  std::uint64_t ensure_capacity(std::uint64_t now, std::uint64_t needed_slots);
  /// Ends the active window; the schedule may not reopen a window before
  /// the slot after `slot`.
  void release(std::uint64_t slot);

  bool window_active() const { return active_.has_value(); }
  const SchedulerConfig& config() const { return cfg_; }

 private:
  SchedulerConfig cfg_;
  std::optional<ScheduleWindow> active_;
  std::uint64_t resume_floor_ = 0;
};

}  // namespace powertalk::proto
