#pragma once

#include <iosfwd>
#include <vector>

#include "entropic/path_engine.hpp"

namespace entropic {

// Coefficient of (T - t) in rho(t) for the quadratic-terminal example.
enum class RhoConvention {
  corrected,  // rho(t) = 1 + beta (T - t), forced by the Gaussian moment identity
  printed,    // rho(t) = 1 + beta^2 (T - t), kept only to show that it breaks the martingale property
};

/// Cost C = (X_T - target)^2 / 2 for X = start + W.
struct BridgeSpec {
  double beta = 1.0;
  double horizon = 1.0;
  double target = 0.0;
  double start = 0.0;  // X_0; fixes the normalizer so that Z*_0 = 1
  RhoConvention rho_convention = RhoConvention::corrected;

  void validate() const;
  double rho(double t) const;
};

// u*(t, x) = -beta (x - target) / rho(t), for 0 <= t < T.
double bridge_control(const BridgeSpec& spec, double t, double x);
// Z*_t = rho(t)^{-1/2} exp(-beta (x - target)^2 / (2 rho(t))) / K, 0 <= t <= T.
double bridge_density(const BridgeSpec& spec, double t, double x);
double bridge_log_density(const BridgeSpec& spec, double t, double x);
// -(1/beta) ln E^Q exp(-beta C) in closed form.
double bridge_optimal_value(const BridgeSpec& spec);
ControlPolicy bridge_policy(const BridgeSpec& spec);

/// Cost C = M_T = max_{s <= T} W_s with W_0 = 0.
struct MaxBmSpec {
  double beta = 1.0;
  double horizon = 1.0;

  void validate() const;
};

// Continuous part of the law of M_T given (W_t, M_t) = (w, m): zero for xi <= m.
double max_bm_conditional_density(const MaxBmSpec& spec, double t, double w, double m, double xi);
// Q(M_T = M_t | W_t = w, M_t = m) = erf((m - w) / sqrt(2 (T - t))).
double max_bm_atom(const MaxBmSpec& spec, double t, double w, double m);
// K = E^Q exp(-beta M_T) by quadrature against the reflection-principle density of M_T.
double max_bm_normalizer(const MaxBmSpec& spec);
// Z*_t as a function of (t, W_t, M_t); at t = T it is exp(-beta m) / K.
double max_bm_density(const MaxBmSpec& spec, double t, double w, double m);
double max_bm_log_density(const MaxBmSpec& spec, double t, double w, double m);
// u(t, w, m), evaluated in log space; always in [-beta, 0].
double max_bm_control(const MaxBmSpec& spec, double t, double w, double m);
ControlPolicy max_bm_policy(const MaxBmSpec& spec);

// CSV grid (t, w, m, u) of the max-BM policy for m in m_values and w = m - gap, gap in gaps.
void write_max_bm_surface_csv(const MaxBmSpec& spec, const std::vector<double>& times,
                              const std::vector<double>& m_values, const std::vector<double>& gaps, std::ostream& out);

}  // namespace entropic
