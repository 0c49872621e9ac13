#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chaoskit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or out-of-range input (negative radius, empty cloud, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced while evaluating coefficients or stepping.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t step = 0) : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Model or experiment documents that fail to parse; `field` names the culprit.
class LoadError : public Error {
 public:
  LoadError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// An integral that does not converge (dissipativity tail too weak).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace chaoskit
