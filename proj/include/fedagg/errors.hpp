// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fedagg {

// Bad scenario / topology name / parameter value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Topology document violates a structural invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Topology text could not be parsed; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A metric was requested over an empty population (e.g. TRFR with zero rounds).
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulation state audit failed (capacity overshoot, ledger mismatch, ...).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fedagg
