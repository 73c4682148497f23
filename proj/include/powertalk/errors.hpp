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

#include <stdexcept>
#include <string>

namespace powertalk {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// grid
class NoVoltageSourceError : public Error {
 public:
  using Error::Error;
};
class NonPositiveResistanceError : public Error {
 public:
  using Error::Error;
};
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// control
class NotEnabledError : public Error {
 public:
  using Error::Error;
};
class EmptyReportsError : public Error {
 public:
  using Error::Error;
};

// phy
class NotCalibratedError : public Error {
 public:
  using Error::Error;
};
class InsufficientBlanksError : public Error {
 public:
  using Error::Error;
};

// protocol framing
class LengthMismatchError : public Error {
 public:
  using Error::Error;
};
class UnknownKindError : public Error {
 public:
  using Error::Error;
};

/// Scenario / sweep configuration problems. `field` names the offending
/// entry so the CLI can print a useful diagnostic.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A runtime invariant (KCL residual, event ordering, ...) failed mid-run.
class InvariantViolationError : public Error {
 public:
  using Error::Error;
};

}  // namespace powertalk
