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
#include "powertalk/event_log.hpp"

#include <cstdio>
#include <sstream>

#include "powertalk/errors.hpp"

namespace powertalk::sim {

std::string fmt_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void EventLog::append(std::uint64_t slot, std::string kind,
                      std::string fields) {
  if (!records_.empty() && slot < records_.back().slot) {
    throw InvariantViolationError("event log slots must be non-decreasing");
  }
  records_.push_back({slot, std::move(kind), std::move(fields)});
}

void EventLog::write(std::ostream& out) const {
  for (const EventRecord& r : records_) {
    out << r.slot << ' ' << r.kind;
    if (!r.fields.empty()) out << ' ' << r.fields;
    out << '\n';
  }
}

std::string EventLog::to_string() const {
  std::ostringstream oss;
  write(oss);
  return oss.str();
}

}  // namespace powertalk::sim
