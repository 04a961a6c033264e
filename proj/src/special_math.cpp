#include "entropic/special_math.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "entropic/error.hpp"

namespace entropic {

namespace {

// beyond this erfc underflows its relative precision; switch to the asymptotic series
constexpr double kAsymptoticStart = 26.0;

double erfcx_asymptotic(double x) {
  // exp(x^2) erfc(x) ~ 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv;
    sum += term;
    if (std::abs(term) < 1e-17) break;
  }
  return sum / (x * std::sqrt(std::numbers::pi));
}

double rho_of(const GaussianParams& g, double gamma) {
  g.validate();
  const double rho = 1.0 + gamma * g.sigma2;
  if (!(rho > 0.0)) throw DomainError("1 + gamma * sigma2 must be positive (the expectation diverges)");
  return rho;
}

}  // namespace

double erf(double x) { return std::erf(x); }
double erfc(double x) { return std::erfc(x); }

double erfcx(double x) {
  if (x < kAsymptoticStart) return std::exp(x * x) * std::erfc(x);
  return erfcx_asymptotic(x);
}

double log_erfc(double x) {
  if (x < kAsymptoticStart) return std::log(std::erfc(x));
  return std::log(erfcx_asymptotic(x)) - x * x;
}

double log_erf(double x) {
  if (x < 0.0) throw DomainError("log_erf needs x >= 0");
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  // log1p(-erfc) keeps precision when erf is close to 1
  if (x > 0.5) return std::log1p(-std::erfc(x));
  return std::log(std::erf(x));
}

void GaussianParams::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2) || !std::isfinite(mu))
    throw DomainError("Gaussian variance must be positive");
}

double gaussian_exp_quad_moment(const GaussianParams& g, double alpha, double gamma) {
  const double rho = rho_of(g, gamma);
  const double mu = g.mu;
  return std::exp(-(gamma * mu * mu - 2.0 * alpha * mu - alpha * alpha * g.sigma2) / (2.0 * rho)) /
         std::sqrt(rho);
}

double gaussian_linear_exp_moment(const GaussianParams& g, double gamma) {
  const double rho = rho_of(g, gamma);
  return g.mu * std::pow(rho, -1.5) * std::exp(-gamma * g.mu * g.mu / (2.0 * rho));
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double value = gauss_kronrod<double, 15>::integrate(f, a, b, 20, rel_tol, &error);
  if (!std::isfinite(value)) throw NumericError("quadrature produced a non-finite value");
  return value;
}

}  // namespace entropic
