#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "entropic/parallel.hpp"
#include "entropic/stats.hpp"

namespace entropic {

/// Uniform grid t_k = k * T / n on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t n_steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return n_steps_; }
  double dt() const noexcept { return dt_; }
  // t_k, with t_n == T exactly
  double time(std::size_t k) const noexcept {
    return k == n_steps_ ? horizon_ : static_cast<double>(k) * dt_;
  }
  // last grid index with t_k <= t
  std::size_t index_at_or_before(double t) const;

 private:
  double horizon_;
  std::size_t n_steps_;
  double dt_;
};

/// Drift b(t, x) in R^n and diffusion sigma(t, x) in R^{n x p} (row-major).
struct SdeCoefficients {
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  std::function<void(double t, std::span<const double> x, std::span<double> drift)> drift;
  std::function<void(double t, std::span<const double> x, std::span<double> sigma)> diffusion;
  // true when sigma is state independent; allows exact bridge-max monitoring
  bool constant_diffusion = false;

  // dX = dW in R^dim
  static SdeCoefficients brownian(std::size_t dim = 1);
  // one-dimensional dX = b(t, x) dt + s(t, x) dW
  static SdeCoefficients scalar(std::function<double(double, double)> b, std::function<double(double, double)> s);

  void validate() const;
};

enum class StateDependency { open_loop, time_state, time_state_max };

struct PolicyInput {
  double t = 0.0;
  std::span<const double> state;
  double running_max = 0.0;  // of state component 0
};

/// Feedback control u(t, state[, running max]) in R^p.
struct ControlPolicy {
  std::size_t dim = 1;
  StateDependency kind = StateDependency::time_state;
  std::function<void(const PolicyInput&, std::span<double> u)> eval;

  static ControlPolicy zero(std::size_t dim = 1);
  static ControlPolicy constant(double value);
  static ControlPolicy open_loop(std::function<double(double)> u);
  static ControlPolicy markov(std::function<double(double t, double x)> u);
  static ControlPolicy with_max(std::function<double(double t, double x, double m)> u);

  bool is_zero() const noexcept { return zero_; }

 private:
  bool zero_ = false;
};

// u(t, x) + shift, keeping the dependency kind.
ControlPolicy shifted(ControlPolicy policy, double shift);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return x > lo && x < hi; }
  double clamp(double x) const noexcept { return x <= lo ? lo : (x >= hi ? hi : x); }
};

/// Path functional c = int_0^{tau ^ T} phi(t, X_t) dt + psi(tau ^ T, X_{tau ^ T}, M_{tau ^ T}).
///
/// tau is the first grid time at which state component 0 leaves `exit_domain`
/// (infinite without a domain); psi then sees the state clamped onto the boundary.
struct CostFunctional {
  std::function<double(double t, std::span<const double> x)> running;
  std::function<double(double t, std::span<const double> x, double running_max)> terminal;
  std::optional<Interval> exit_domain;

  static CostFunctional constant(double k);
  static CostFunctional quadratic_terminal(double target);  // (x_T - target)^2 / 2
  static CostFunctional running_maximum();                  // M_T
  static CostFunctional terminal_only(std::function<double(double)> psi);
};

enum class MaxMonitoring {
  grid,    // max over grid points
  bridge,  // per-step Brownian-bridge maximum (exact for constant diffusion)
};

enum class SamplingMeasure {
  reference,   // uncontrolled dynamics under Q; the control only enters the density
  controlled,  // dynamics under P^u; sampled increments are those of W^u
};

struct SimulationOptions {
  std::uint64_t seed = 0;
  bool antithetic = false;  // path 2k+1 uses the negated increments of path 2k
  // each increment is the scaled sum of this many finer draws, so grids that divide
  // a common fine grid share their Brownian paths
  std::size_t substeps = 1;
  MaxMonitoring max_monitoring = MaxMonitoring::grid;
  // the run fails when more than this fraction of paths diverge
  double max_divergence_rate = 1e-3;
  Execution exec{};
};

/// Materialized ensemble; the reference route used by tests, exports and benchmarks.
struct PathBundle {
  TimeGrid grid{1.0, 1};
  std::size_t n_paths = 0;
  std::size_t state_dim = 0;
  std::size_t noise_dim = 0;
  SimulationOptions options{};
  std::vector<double> increments;   // [path][step][noise]; N(0, dt I) under the sampling measure
  std::vector<double> states;       // [path][node][state], filled by integrate_controlled
  std::vector<double> running_max;  // [path][node]
  std::vector<double> log_density;  // [path][node], ln dP^u/dQ on F_{t_k}
  std::vector<std::uint8_t> diverged;

  std::span<const double> increment(std::size_t path, std::size_t step) const;
  std::span<const double> state(std::size_t path, std::size_t node) const;
  double max_at(std::size_t path, std::size_t node) const { return running_max[path * (grid.steps() + 1) + node]; }
  double log_density_at(std::size_t path, std::size_t node) const {
    return log_density[path * (grid.steps() + 1) + node];
  }
};

PathBundle sample_paths(const TimeGrid& grid, std::size_t n_paths, std::size_t noise_dim,
                        const SimulationOptions& options);

// Euler-Maruyama over the bundle's increments, accumulating ln dP^u/dQ.
PathBundle integrate_controlled(const SdeCoefficients& coeffs, const ControlPolicy& policy, const PathBundle& bundle,
                                std::span<const double> x0,
                                SamplingMeasure measure = SamplingMeasure::controlled);

/// Per-path summary produced by the fused simulation kernel.
struct PathOutcome {
  double cost = 0.0;            // c(X)
  double control_energy = 0.0;  // (1/2) sum |u_k|^2 dt
  double log_density = 0.0;     // ln dP^u/dQ at the stopping time
  double terminal = 0.0;        // state component 0 at the stopping time
  double running_max = 0.0;
  double stop_time = 0.0;
  bool diverged = false;
};

/// Everything a fused path simulation needs.
struct PathProblem {
  SdeCoefficients coeffs = SdeCoefficients::brownian();
  ControlPolicy policy = ControlPolicy::zero();
  CostFunctional cost = CostFunctional::constant(0.0);
  TimeGrid grid{1.0, 1};
  std::vector<double> x0{0.0};
  double t0 = 0.0;  // time offset added to grid times when evaluating b, sigma, u, phi, psi
  SamplingMeasure measure = SamplingMeasure::controlled;
};

// OpenMP kernel: one outcome per path, streaming (no trajectory storage).
std::vector<PathOutcome> simulate_outcomes(const PathProblem& problem, std::size_t n_paths,
                                           const SimulationOptions& options);

// Serial reference: sample_paths + integrate_controlled + cost evaluation on the stored
// trajectories. Bit-identical to simulate_outcomes.
std::vector<PathOutcome> simulate_outcomes_reference(const PathProblem& problem, std::size_t n_paths,
                                                     const SimulationOptions& options);

// Drops diverged paths; throws NumericError above options.max_divergence_rate.
std::size_t check_divergence(std::span<const PathOutcome> outcomes, const SimulationOptions& options);

// Sample mean of c(X) + control_energy / beta over controlled paths.
Estimate estimate_cost(const SdeCoefficients& coeffs, const ControlPolicy& policy, const CostFunctional& cost,
                       const TimeGrid& grid, std::size_t n_paths, double beta, std::span<const double> x0,
                       const SimulationOptions& options);

// -(1/beta) ln mean exp(-beta c(X)) under uncontrolled dynamics, delta-method error.
Estimate optimal_value_mc(const CostFunctional& cost, const SdeCoefficients& coeffs, const TimeGrid& grid,
                          std::size_t n_paths, double beta, std::span<const double> x0,
                          const SimulationOptions& options);

// Mean of value(outcome) over the non-diverged paths of a fused simulation.
Estimate outcome_mean(const PathProblem& problem, std::size_t n_paths, const SimulationOptions& options,
                      const std::function<double(const PathOutcome&)>& value);

// Mean of exp(-beta c(X)) under Q (the Feynman-Kac weight) with its standard error.
Estimate exponential_weight_mc(const PathProblem& problem, std::size_t n_paths, double beta,
                               const SimulationOptions& options);

// H(P^u; P^v) as the P^u-mean of (1/2) sum |u_k - v_k|^2 dt, both evaluated on u-controlled paths.
Estimate entropy_between_policies(const ControlPolicy& u, const ControlPolicy& v, const SdeCoefficients& coeffs,
                                  const TimeGrid& grid, std::size_t n_paths, std::span<const double> x0,
                                  const SimulationOptions& options);

// Mean of Z^u_T = exp(ln dP^u/dQ) over Q-sampled paths.
Estimate density_martingale_mean(const SdeCoefficients& coeffs, const ControlPolicy& policy, const TimeGrid& grid,
                                 std::size_t n_paths, std::span<const double> x0, const SimulationOptions& options);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double std_error = 0.0;  // of lhs - rhs, from per-path differences
};

// E^Q[Z^u_T W_r] against sum_{t_k < r} E^Q[u_k Z^u_k] dt, driving process X = W (p = 1).
IdentityCheck density_drift_identity_check(const ControlPolicy& policy, const TimeGrid& grid, std::size_t n_paths,
                                           double r, const SimulationOptions& options);

// CSV: path_id, t, x_0..x_{n-1}, running_max, log_density (versioned header comment).
void write_bundle_csv(const PathBundle& bundle, std::ostream& out);

}  // namespace entropic
