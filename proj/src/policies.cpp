#include "entropic/policies.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "entropic/csv.hpp"
#include "entropic/error.hpp"
#include "entropic/special_math.hpp"

namespace entropic {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadratic terminal cost

void BridgeSpec::validate() const {
  require_positive(beta, "beta");
  require_positive(horizon, "horizon");
}

double BridgeSpec::rho(double t) const {
  const double coefficient = rho_convention == RhoConvention::corrected ? beta : beta * beta;
  return 1.0 + coefficient * (horizon - t);
}

double bridge_control(const BridgeSpec& spec, double t, double x) {
  spec.validate();
  if (t < 0.0 || t >= spec.horizon) throw DomainError("bridge control needs 0 <= t < T");
  return -spec.beta * (x - spec.target) / spec.rho(t);
}

double bridge_log_density(const BridgeSpec& spec, double t, double x) {
  spec.validate();
  if (t < 0.0 || t > spec.horizon) throw DomainError("bridge density needs 0 <= t <= T");
  auto log_unnormalized = [&](double s, double y) {
    const double rho = spec.rho(s);
    const double d = y - spec.target;
    return -0.5 * std::log(rho) - 0.5 * spec.beta * d * d / rho;
  };
  return log_unnormalized(t, x) - log_unnormalized(0.0, spec.start);
}

double bridge_density(const BridgeSpec& spec, double t, double x) { return std::exp(bridge_log_density(spec, t, x)); }

double bridge_optimal_value(const BridgeSpec& spec) {
  spec.validate();
  const GaussianParams law{spec.start - spec.target, spec.horizon};
  return -std::log(gaussian_exp_quad_moment(law, 0.0, spec.beta)) / spec.beta;
}

ControlPolicy bridge_policy(const BridgeSpec& spec) {
  spec.validate();
  return ControlPolicy::markov([spec](double t, double x) { return bridge_control(spec, t, x); });
}

// ---------------------------------------------------------------------------
// Running maximum

void MaxBmSpec::validate() const {
  require_positive(beta, "beta");
  require_positive(horizon, "horizon");
}

namespace {

void require_state(const MaxBmSpec& spec, double t, double w, double m, bool allow_terminal) {
  spec.validate();
  if (t < 0.0 || t > spec.horizon || (!allow_terminal && t == spec.horizon))
    throw DomainError("running-max formulas need 0 <= t < T");
  if (m < w) throw DomainError("running maximum below the current value (m < w)");
}

// ln of the two bracketed terms of Z*_t K: (atom part, continuation part)
std::pair<double, double> log_density_terms(const MaxBmSpec& spec, double t, double w, double m) {
  const double tau = spec.horizon - t;
  const double scale = std::sqrt(2.0 * tau);
  const double atom = -spec.beta * m + log_erf((m - w) / scale);
  const double beyond = -spec.beta * w + 0.5 * spec.beta * spec.beta * tau +
                        log_erfc((m - w + spec.beta * tau) / scale);
  return {atom, beyond};
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

double max_bm_conditional_density(const MaxBmSpec& spec, double t, double w, double m, double xi) {
  require_state(spec, t, w, m, false);
  if (xi <= m) return 0.0;
  const double tau = spec.horizon - t;
  return std::sqrt(2.0 / (std::numbers::pi * tau)) * std::exp(-(xi - w) * (xi - w) / (2.0 * tau));
}

double max_bm_atom(const MaxBmSpec& spec, double t, double w, double m) {
  require_state(spec, t, w, m, false);
  return erf((m - w) / std::sqrt(2.0 * (spec.horizon - t)));
}

double max_bm_normalizer(const MaxBmSpec& spec) {
  spec.validate();
  // densities are evaluated along whole ensembles with one spec; keep the last K
  thread_local double cached_beta = 0.0, cached_horizon = 0.0, cached_k = 0.0;
  if (spec.beta == cached_beta && spec.horizon == cached_horizon) return cached_k;
  const double T = spec.horizon;
  const double beta = spec.beta;
  const double c = std::sqrt(2.0 / (std::numbers::pi * T));
  const double k = integrate([&](double a) { return std::exp(-beta * a) * c * std::exp(-a * a / (2.0 * T)); }, 0.0,
                             std::numeric_limits<double>::infinity());
  cached_beta = spec.beta;
  cached_horizon = spec.horizon;
  cached_k = k;
  return k;
}

double max_bm_log_density(const MaxBmSpec& spec, double t, double w, double m) {
  require_state(spec, t, w, m, true);
  const double log_k = std::log(max_bm_normalizer(spec));
  if (t == spec.horizon) return -spec.beta * m - log_k;
  const auto [atom, beyond] = log_density_terms(spec, t, w, m);
  return log_add(atom, beyond) - log_k;
}

double max_bm_density(const MaxBmSpec& spec, double t, double w, double m) {
  return std::exp(max_bm_log_density(spec, t, w, m));
}

double max_bm_control(const MaxBmSpec& spec, double t, double w, double m) {
  require_state(spec, t, w, m, false);
  const auto [atom, beyond] = log_density_terms(spec, t, w, m);
  // -beta e^B / (e^A + e^B) = -beta / (1 + e^{A - B})
  if (atom == -std::numeric_limits<double>::infinity()) return -spec.beta;
  return -spec.beta / (1.0 + std::exp(atom - beyond));
}

ControlPolicy max_bm_policy(const MaxBmSpec& spec) {
  spec.validate();
  return ControlPolicy::with_max([spec](double t, double w, double m) { return max_bm_control(spec, t, w, m); });
}

void write_max_bm_surface_csv(const MaxBmSpec& spec, const std::vector<double>& times,
                              const std::vector<double>& m_values, const std::vector<double>& gaps,
                              std::ostream& out) {
  CsvWriter csv(out, "entropic max_bm_policy_surface", 1, {"t", "w", "m", "u"});
  for (double t : times) {
    for (double m : m_values) {
      for (double gap : gaps) {
        const double w = m - gap;
        csv.cell(t).cell(w).cell(m).cell(max_bm_control(spec, t, w, m));
        csv.end_row();
      }
    }
  }
}

}  // namespace entropic
