#pragma once

#include <stdexcept>
#include <string>

namespace entropic {

// Input vectors or state dimensions that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain where a formula is defined (t >= T, rho <= 0, beta <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Floating point breakdown: underflowed normalizers, singular pivots, too many diverged paths.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// y <= 0 somewhere on a linearized HJB grid.
class PositivityError : public NumericError {
 public:
  PositivityError(double t, double x, double y)
      : NumericError("non-positive solution y=" + std::to_string(y) + " at t=" + std::to_string(t) +
                     ", x=" + std::to_string(x)),
        t_(t),
        x_(x) {}
  double time() const noexcept { return t_; }
  double location() const noexcept { return x_; }

 private:
  double t_;
  double x_;
};

}  // namespace entropic
