#pragma once

#include <stdexcept>
#include <string>

namespace cprobe {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidDimension : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// A Fock cutoff is too small for the requested state or operation.
class CutoffInsufficient : public Error {
 public:
  CutoffInsufficient(const std::string& what, int needed_dim)
      : Error(what + " (needed dim >= " + std::to_string(needed_dim) + ")"),
        needed_dim_(needed_dim) {}

  int needed_dim() const noexcept { return needed_dim_; }

 private:
  int needed_dim_;
};

// A perturbative or asymptotic precondition does not hold. `inequality()`
// names the violated condition, e.g. "λ < 1".
class OutOfRegime : public Error {
 public:
  OutOfRegime(const std::string& inequality, const std::string& detail)
      : Error("out of regime: requires " + inequality + " (" + detail + ")"),
        inequality_(inequality) {}

  const std::string& inequality() const noexcept { return inequality_; }

 private:
  std::string inequality_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cprobe
