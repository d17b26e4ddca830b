#pragma once

#include <stdexcept>
#include <string>

namespace pens {

// Bad arguments to a library call (shape mismatch, bad order, bad grid).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration file could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run aborted mid-trajectory: non-finite values, vacuum, or a step size
// outside the stability bound. Carries the simulation time of the failure.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace pens
