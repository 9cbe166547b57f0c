#pragma once

#include <stdexcept>
#include <string>

#include "retlab/geometry.hpp"

namespace retlab {

// Precondition violations on configuration or field parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The kernel 1/sqrt(d^2 + eps^2) was asked for d = eps = 0.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The field has no finite retarded support, so the integral identity's decay
// assumption does not hold and no truncation radius exists.
class UnboundedSupportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// r == r_src in the light-cone collapse: the retarded root is degenerate.
class DegenerateLightConeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An integrand returned a non-finite sample.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, SpaceTimePoint where)
      : std::runtime_error(what), where_(where) {}

  const SpaceTimePoint& where() const noexcept { return where_; }

 private:
  SpaceTimePoint where_;
};

}  // namespace retlab
