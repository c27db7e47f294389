#pragma once

#include <stdexcept>
#include <string>

namespace spraymom {

// Root of every error thrown by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Non-finite value encountered while integrating or evaluating.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double node) : Error(what), node_(node) {}
  double node() const noexcept { return node_; }

 private:
  double node_;
};

class RealizabilityError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

class UnsupportedBasisError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Failure inside a time loop; the message names the case, time and cell.
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace spraymom
