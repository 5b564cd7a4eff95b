#pragma once

#include <stdexcept>
#include <string>

namespace fadp {

// Malformed input: bad dimensions, violated invariants, unparsable config.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integration produced a non-finite value or a state left the guard box.
class NumericalBlowUp : public std::runtime_error {
 public:
  NumericalBlowUp(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Regressor data does not span the weight space.
class InsufficientExcitation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A policy iteration step produced a closed loop that left the state guard.
class InadmissiblePolicy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stability bound was requested while its gain conditions do not hold.
class GainConditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fadp
