#pragma once

#include <functional>

namespace entropic {

double erf(double x);
double erfc(double x);
// exp(x^2) erfc(x), finite for all x where the result is representable.
double erfcx(double x);
// ln erfc(x) without underflow for large positive x.
double log_erfc(double x);
// ln erf(x) for x > 0; -infinity at 0.
double log_erf(double x);

/// Normal law N(mu, sigma2).
struct GaussianParams {
  double mu = 0.0;
  double sigma2 = 1.0;

  // Throws DomainError unless sigma2 > 0.
  void validate() const;
};

// E[exp(alpha Y - gamma Y^2 / 2)] for Y ~ N(mu, sigma2); needs rho = 1 + gamma sigma2 > 0.
double gaussian_exp_quad_moment(const GaussianParams& g, double alpha, double gamma);
// E[Y exp(-gamma Y^2 / 2)]; same domain.
double gaussian_linear_exp_moment(const GaussianParams& g, double gamma);

// Adaptive 15-point Gauss-Kronrod over [a, b]; either end may be infinite.
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-13);

}  // namespace entropic
