#pragma once

#include <stdexcept>
#include <string>

#include "scalopr/types.hpp"

namespace scalopr {

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent bank / reconstruction / experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside the domain of a function (e.g. negative powers at z = 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite value or failed numerical step. `scale` is -1 when not scale-specific.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int scale = -1)
      : std::runtime_error(what), scale_(scale) {}
  int scale() const noexcept { return scale_; }

 private:
  int scale_;
};

/// Root of the squared-modulus Laurent polynomial without a (s, 1/conj(s)) partner.
class DegenerateRootsError : public NumericalError {
 public:
  DegenerateRootsError(const std::string& what, Complex root)
      : NumericalError(what), root_(root) {}
  Complex root() const noexcept { return root_; }

 private:
  Complex root_;
};

}  // namespace scalopr
