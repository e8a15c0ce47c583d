#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace snlevy {

/// Argument outside the mathematical domain of an operation (e.g. lambda < 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed argument or configuration.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The model/branching-rate combination is outside the regime an operation requires.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not enough usable data for a tail fit.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model or dataset file does not match its schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A batch could not be completed; `completed()` replicates were produced.
class PartialDatasetError : public std::runtime_error {
 public:
  PartialDatasetError(const std::string& what, std::int64_t completed)
      : std::runtime_error(what), completed_(completed) {}
  std::int64_t completed() const noexcept { return completed_; }

 private:
  std::int64_t completed_;
};

}  // namespace snlevy
