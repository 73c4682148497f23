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
#include <ostream>
#include <string>
#include <vector>

namespace powertalk::sim {

/// Fixed-format double rendering so logs and CSVs replay byte-identically.
std::string fmt_g17(double value);

/// One timestamped record: slot index, event kind, space-separated
/// key=value fields.
struct EventRecord {
  std::uint64_t slot = 0;
  std::string kind;
  std::string fields;
};

/// Append-only, slot-ordered record of everything that happened in a run.
class EventLog {
 public:
  void append(std::uint64_t slot, std::string kind, std::string fields = {});

  const std::vector<EventRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  /// Line-delimited form: "<slot> <kind> <fields>\n" per record.
  void write(std::ostream& out) const;
  std::string to_string() const;

 private:
  std::vector<EventRecord> records_;
};

}  // namespace powertalk::sim
