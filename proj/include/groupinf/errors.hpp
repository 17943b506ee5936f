#pragma once

#include <stdexcept>
#include <string>

namespace groupinf {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The tested group's columns are (numerically) inside the span of the other
// selected groups, so the test subspace is {0}.
class UntestableGroupError : public Error {
public:
  using Error::Error;
};

// P_L Y vanished, so dir_L(Y) is undefined.
class DegenerateDirectionError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

class BracketError : public Error {
public:
  using Error::Error;
};

// Importance-sampling denominator carried too little effective mass.
class DegenerateSampleError : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public Error {
public:
  using Error::Error;
};

class SelectionError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

// Invalid user-facing configuration. `option` names the offending flag/key.
class ConfigError : public Error {
public:
  ConfigError(std::string option, const std::string& message)
      : Error(message), option_(std::move(option)) {}
  const std::string& option() const noexcept { return option_; }

private:
  std::string option_;
};

}  // namespace groupinf
