#pragma once

#include <stdexcept>
#include <string>

namespace ddtune {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent or malformed configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or record.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sequence has (numerically) no response at the requested signal frequency.
class FilterBlindError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace ddtune
