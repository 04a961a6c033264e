#pragma once

// Arithmetic shared by the fused OpenMP kernel and the materialized reference route.
// Both must call these in the same order to stay bit-identical.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "entropic/path_engine.hpp"
#include "entropic/rng.hpp"

namespace entropic::detail {

struct StreamId {
  std::uint64_t stream;
  double sign;
};

inline StreamId stream_for_path(std::size_t path, bool antithetic) {
  if (!antithetic) return {static_cast<std::uint64_t>(path), 1.0};
  return {static_cast<std::uint64_t>(path / 2), (path % 2 == 0) ? 1.0 : -1.0};
}

// Brownian increment over one grid step: sqrt(dt / S) * sum of S fine normals per component.
inline void draw_increment(PathStream& stream, std::size_t step, std::size_t substeps, double dt, double sign,
                           std::span<double> out) {
  const std::size_t p = out.size();
  const double scale = sign * std::sqrt(dt / static_cast<double>(substeps));
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (std::size_t f = 0; f < substeps; ++f) {
      s += stream.normal((step * substeps + f) * p + j);
    }
    out[j] = scale * s;
  }
}

// Maximum of a Brownian bridge from a to b with variance `var` over the step.
inline double bridge_maximum(double a, double b, double var, double uniform) {
  const double d = b - a;
  return 0.5 * (a + b + std::sqrt(d * d - 2.0 * var * std::log(uniform)));
}

// Variance rate of state component 0 over one step: sum_j sigma_{0j}^2.
inline double first_component_variance(std::span<const double> sigma, std::size_t p) {
  double v = 0.0;
  for (std::size_t j = 0; j < p; ++j) v += sigma[j] * sigma[j];
  return v;
}

struct StepWorkspace {
  std::vector<double> drift, sigma, u, sampled, q_increment, next;

  StepWorkspace(std::size_t n, std::size_t p)
      : drift(n), sigma(n * p), u(p, 0.0), sampled(p), q_increment(p), next(n) {}
};

// One Euler-Maruyama step. `ws.sampled` holds the increment drawn under the sampling
// measure and `ws.u` the control at (t, x). Fills ws.q_increment and ws.next and returns
// the log-density increment u . dW - |u|^2 dt / 2 together with |u|^2 dt / 2.
struct StepDensity {
  double log_density;
  double energy;
};

inline StepDensity euler_step(const SdeCoefficients& coeffs, bool zero_control, SamplingMeasure measure, double t,
                              double dt, std::span<const double> x, StepWorkspace& ws) {
  const std::size_t n = coeffs.state_dim;
  const std::size_t p = coeffs.noise_dim;
  coeffs.drift(t, x, ws.drift);
  coeffs.diffusion(t, x, ws.sigma);
  double usq = 0.0;
  double u_dw = 0.0;
  const bool controlled = measure == SamplingMeasure::controlled;
  for (std::size_t j = 0; j < p; ++j) {
    const double uj = zero_control ? 0.0 : ws.u[j];
    ws.q_increment[j] = controlled ? ws.sampled[j] + uj * dt : ws.sampled[j];
    usq += uj * uj;
    u_dw += uj * ws.q_increment[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double drift = ws.drift[i];
    double noise = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double s = ws.sigma[i * p + j];
      if (controlled && !zero_control) drift += s * ws.u[j];
      noise += s * ws.sampled[j];
    }
    ws.next[i] = x[i] + drift * dt + noise;
  }
  const double energy = 0.5 * usq * dt;
  return {u_dw - energy, energy};
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace entropic::detail
