#include "entropic/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "entropic/detail/euler.hpp"
#include "entropic/error.hpp"

namespace entropic {

// ---------------------------------------------------------------------------
// Value types

TimeGrid::TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("time horizon must be positive");
  if (n_steps == 0) throw DomainError("time grid needs at least one step");
  dt_ = horizon / static_cast<double>(n_steps);
}

std::size_t TimeGrid::index_at_or_before(double t) const {
  if (t <= 0.0) return 0;
  if (t >= horizon_) return n_steps_;
  // tolerate round-off when t sits on a grid node
  const double k = std::floor(t / dt_ + 1e-9);
  return std::min(static_cast<std::size_t>(k), n_steps_);
}

SdeCoefficients SdeCoefficients::brownian(std::size_t dim) {
  SdeCoefficients c;
  c.state_dim = dim;
  c.noise_dim = dim;
  c.drift = [](double, std::span<const double>, std::span<double> b) { std::fill(b.begin(), b.end(), 0.0); };
  c.diffusion = [dim](double, std::span<const double>, std::span<double> s) {
    std::fill(s.begin(), s.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) s[i * dim + i] = 1.0;
  };
  c.constant_diffusion = true;
  return c;
}

SdeCoefficients SdeCoefficients::scalar(std::function<double(double, double)> b,
                                        std::function<double(double, double)> s) {
  SdeCoefficients c;
  c.drift = [b = std::move(b)](double t, std::span<const double> x, std::span<double> out) { out[0] = b(t, x[0]); };
  c.diffusion = [s = std::move(s)](double t, std::span<const double> x, std::span<double> out) {
    out[0] = s(t, x[0]);
  };
  return c;
}

void SdeCoefficients::validate() const {
  if (state_dim == 0 || noise_dim == 0) throw DimensionError("SDE dimensions must be positive");
  if (!drift || !diffusion) throw DomainError("SDE coefficients are not set");
}

ControlPolicy ControlPolicy::zero(std::size_t dim) {
  ControlPolicy p;
  p.dim = dim;
  p.kind = StateDependency::open_loop;
  p.eval = [](const PolicyInput&, std::span<double> u) { std::fill(u.begin(), u.end(), 0.0); };
  p.zero_ = true;
  return p;
}

ControlPolicy ControlPolicy::constant(double value) {
  return open_loop([value](double) { return value; });
}

ControlPolicy ControlPolicy::open_loop(std::function<double(double)> u) {
  ControlPolicy p;
  p.kind = StateDependency::open_loop;
  p.eval = [u = std::move(u)](const PolicyInput& in, std::span<double> out) { out[0] = u(in.t); };
  return p;
}

ControlPolicy ControlPolicy::markov(std::function<double(double, double)> u) {
  ControlPolicy p;
  p.kind = StateDependency::time_state;
  p.eval = [u = std::move(u)](const PolicyInput& in, std::span<double> out) { out[0] = u(in.t, in.state[0]); };
  return p;
}

ControlPolicy ControlPolicy::with_max(std::function<double(double, double, double)> u) {
  ControlPolicy p;
  p.kind = StateDependency::time_state_max;
  p.eval = [u = std::move(u)](const PolicyInput& in, std::span<double> out) {
    out[0] = u(in.t, in.state[0], in.running_max);
  };
  return p;
}

ControlPolicy shifted(ControlPolicy policy, double shift) {
  ControlPolicy out;
  out.dim = policy.dim;
  out.kind = policy.kind;
  out.eval = [inner = std::move(policy.eval), shift](const PolicyInput& in, std::span<double> u) {
    inner(in, u);
    for (auto& v : u) v += shift;
  };
  return out;
}

CostFunctional CostFunctional::constant(double k) {
  CostFunctional c;
  c.terminal = [k](double, std::span<const double>, double) { return k; };
  return c;
}

CostFunctional CostFunctional::quadratic_terminal(double target) {
  CostFunctional c;
  c.terminal = [target](double, std::span<const double> x, double) {
    const double d = x[0] - target;
    return 0.5 * d * d;
  };
  return c;
}

CostFunctional CostFunctional::running_maximum() {
  CostFunctional c;
  c.terminal = [](double, std::span<const double>, double m) { return m; };
  return c;
}

CostFunctional CostFunctional::terminal_only(std::function<double(double)> psi) {
  CostFunctional c;
  c.terminal = [psi = std::move(psi)](double, std::span<const double> x, double) { return psi(x[0]); };
  return c;
}

// ---------------------------------------------------------------------------
// Fused kernel

namespace {

void validate_problem(const PathProblem& problem) {
  problem.coeffs.validate();
  if (problem.x0.size() != problem.coeffs.state_dim) throw DimensionError("x0 does not match the state dimension");
  if (problem.policy.dim != problem.coeffs.noise_dim)
    throw DimensionError("control dimension must equal the noise dimension");
  if (!problem.policy.eval) throw DomainError("control policy is not set");
  if (!problem.cost.terminal) throw DomainError("cost functional has no terminal part");
}

void validate_options(const SimulationOptions& options) {
  if (options.substeps == 0) throw DomainError("substeps must be >= 1");
}

// Walks one path; `visit(k, t, x, m, u, q_increment)` runs after the control and the
// Q-increment of step k are known and before the state moves.
template <class Visitor>
PathOutcome walk_path(const PathProblem& problem, std::size_t path, const SimulationOptions& options,
                      detail::StepWorkspace& ws, std::vector<double>& x, Visitor&& visit) {
  const auto& coeffs = problem.coeffs;
  const auto& grid = problem.grid;
  const std::size_t p = coeffs.noise_dim;
  const double dt = grid.dt();
  const bool zero = problem.policy.is_zero();
  const bool bridge = options.max_monitoring == MaxMonitoring::bridge;

  const auto id = detail::stream_for_path(path, options.antithetic);
  PathStream normals(options.seed, id.stream, StreamTag::brownian);
  PathStream uniforms(options.seed, id.stream, StreamTag::bridge_max);

  std::copy(problem.x0.begin(), problem.x0.end(), x.begin());
  PathOutcome out;
  double m = x[0];
  double running = 0.0;
  double phi_prev = problem.cost.running ? problem.cost.running(problem.t0, x) : 0.0;
  std::size_t k = 0;
  bool exited = false;

  for (; k < grid.steps(); ++k) {
    const double t = problem.t0 + grid.time(k);
    if (!zero) {
      problem.policy.eval(PolicyInput{t, x, m}, ws.u);
      if (!detail::all_finite(ws.u)) {
        out.diverged = true;
        break;
      }
    }
    detail::draw_increment(normals, k, options.substeps, dt, id.sign, ws.sampled);
    const auto step = detail::euler_step(coeffs, zero, problem.measure, t, dt, x, ws);
    out.log_density += step.log_density;
    out.control_energy += step.energy;
    visit(k, t, std::span<const double>(x), m, std::span<const double>(ws.u), std::span<const double>(ws.q_increment));

    if (!detail::all_finite(ws.next)) {
      out.diverged = true;
      break;
    }
    if (bridge) {
      const double var = detail::first_component_variance(ws.sigma, p) * dt;
      m = std::max(m, detail::bridge_maximum(x[0], ws.next[0], var, uniforms.uniform(k)));
    } else {
      m = std::max(m, ws.next[0]);
    }
    std::copy(ws.next.begin(), ws.next.end(), x.begin());
    if (problem.cost.running) {
      const double phi = problem.cost.running(problem.t0 + grid.time(k + 1), x);
      running += 0.5 * (phi_prev + phi) * dt;
      phi_prev = phi;
    }
    if (problem.cost.exit_domain && !problem.cost.exit_domain->contains(x[0])) {
      x[0] = problem.cost.exit_domain->clamp(x[0]);
      m = std::min(m, problem.cost.exit_domain->hi);
      exited = true;
      ++k;
      break;
    }
  }
  if (out.diverged) {
    out.cost = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const std::size_t stop = exited ? k : grid.steps();
  out.stop_time = problem.t0 + grid.time(stop);
  out.terminal = x[0];
  out.running_max = m;
  out.cost = running + problem.cost.terminal(out.stop_time, x, m);
  if (!std::isfinite(out.cost)) out.diverged = true;
  return out;
}

struct NoVisit {
  void operator()(std::size_t, double, std::span<const double>, double, std::span<const double>,
                  std::span<const double>) const {}
};

}  // namespace

std::vector<PathOutcome> simulate_outcomes(const PathProblem& problem, std::size_t n_paths,
                                           const SimulationOptions& options) {
  validate_problem(problem);
  validate_options(options);
  std::vector<PathOutcome> outcomes(n_paths);
  for_each_index(n_paths, options.exec, [&](std::size_t i) {
    detail::StepWorkspace ws(problem.coeffs.state_dim, problem.coeffs.noise_dim);
    std::vector<double> x(problem.coeffs.state_dim);
    outcomes[i] = walk_path(problem, i, options, ws, x, NoVisit{});
  });
  return outcomes;
}

std::size_t check_divergence(std::span<const PathOutcome> outcomes, const SimulationOptions& options) {
  const auto bad = static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const PathOutcome& o) { return o.diverged; }));
  if (!outcomes.empty() &&
      static_cast<double>(bad) > options.max_divergence_rate * static_cast<double>(outcomes.size())) {
    throw NumericError(std::to_string(bad) + " of " + std::to_string(outcomes.size()) +
                       " paths diverged (above the allowed rate)");
  }
  return bad;
}

namespace {

template <class Fn>
Estimate mean_over(std::span<const PathOutcome> outcomes, const SimulationOptions& options, Fn&& value) {
  const std::size_t bad = check_divergence(outcomes, options);
  std::vector<double> v;
  v.reserve(outcomes.size() - bad);
  for (const auto& o : outcomes) {
    if (!o.diverged) v.push_back(value(o));
  }
  Estimate e = sample_mean(v);
  e.excluded = bad;
  return e;
}

void require_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
}

PathProblem make_problem(const SdeCoefficients& coeffs, const ControlPolicy& policy, const CostFunctional& cost,
                         const TimeGrid& grid, std::span<const double> x0, SamplingMeasure measure) {
  PathProblem p;
  p.coeffs = coeffs;
  p.policy = policy;
  p.cost = cost;
  p.grid = grid;
  p.x0.assign(x0.begin(), x0.end());
  p.measure = measure;
  return p;
}

}  // namespace

Estimate estimate_cost(const SdeCoefficients& coeffs, const ControlPolicy& policy, const CostFunctional& cost,
                       const TimeGrid& grid, std::size_t n_paths, double beta, std::span<const double> x0,
                       const SimulationOptions& options) {
  require_beta(beta);
  const auto problem = make_problem(coeffs, policy, cost, grid, x0, SamplingMeasure::controlled);
  const auto outcomes = simulate_outcomes(problem, n_paths, options);
  return mean_over(outcomes, options, [beta](const PathOutcome& o) { return o.cost + o.control_energy / beta; });
}

Estimate outcome_mean(const PathProblem& problem, std::size_t n_paths, const SimulationOptions& options,
                      const std::function<double(const PathOutcome&)>& value) {
  const auto outcomes = simulate_outcomes(problem, n_paths, options);
  return mean_over(outcomes, options, value);
}

Estimate exponential_weight_mc(const PathProblem& problem, std::size_t n_paths, double beta,
                               const SimulationOptions& options) {
  require_beta(beta);
  const auto outcomes = simulate_outcomes(problem, n_paths, options);
  return mean_over(outcomes, options, [beta](const PathOutcome& o) { return std::exp(-beta * o.cost); });
}

Estimate optimal_value_mc(const CostFunctional& cost, const SdeCoefficients& coeffs, const TimeGrid& grid,
                          std::size_t n_paths, double beta, std::span<const double> x0,
                          const SimulationOptions& options) {
  require_beta(beta);
  const auto problem =
      make_problem(coeffs, ControlPolicy::zero(coeffs.noise_dim), cost, grid, x0, SamplingMeasure::reference);
  const auto outcomes = simulate_outcomes(problem, n_paths, options);
  const std::size_t bad = check_divergence(outcomes, options);
  double shift = std::numeric_limits<double>::infinity();
  for (const auto& o : outcomes) {
    if (!o.diverged) shift = std::min(shift, o.cost);
  }
  std::vector<double> w;
  w.reserve(outcomes.size() - bad);
  for (const auto& o : outcomes) {
    if (!o.diverged) w.push_back(std::exp(-beta * (o.cost - shift)));
  }
  const Estimate weight = sample_mean(w);
  Estimate e;
  e.value = shift - std::log(weight.value) / beta;
  e.std_error = weight.std_error / (beta * weight.value);
  e.samples = weight.samples;
  e.excluded = bad;
  return e;
}

Estimate entropy_between_policies(const ControlPolicy& u, const ControlPolicy& v, const SdeCoefficients& coeffs,
                                  const TimeGrid& grid, std::size_t n_paths, std::span<const double> x0,
                                  const SimulationOptions& options) {
  if (u.dim != v.dim) throw DimensionError("policies differ in dimension");
  auto problem = make_problem(coeffs, u, CostFunctional::constant(0.0), grid, x0, SamplingMeasure::controlled);
  validate_problem(problem);
  validate_options(options);
  std::vector<double> values(n_paths);
  std::vector<PathOutcome> outcomes(n_paths);
  const double dt = grid.dt();
  for_each_index(n_paths, options.exec, [&](std::size_t i) {
    detail::StepWorkspace ws(coeffs.state_dim, coeffs.noise_dim);
    std::vector<double> x(coeffs.state_dim);
    std::vector<double> vv(v.dim);
    double acc = 0.0;
    outcomes[i] = walk_path(problem, i, options, ws, x,
                            [&](std::size_t, double t, std::span<const double> state, double m,
                                std::span<const double> uu, std::span<const double>) {
                              v.eval(PolicyInput{t, state, m}, vv);
                              double d2 = 0.0;
                              for (std::size_t j = 0; j < vv.size(); ++j) {
                                const double d = (u.is_zero() ? 0.0 : uu[j]) - vv[j];
                                d2 += d * d;
                              }
                              acc += 0.5 * d2 * dt;
                            });
    values[i] = acc;
  });
  const std::size_t bad = check_divergence(outcomes, options);
  std::vector<double> kept;
  kept.reserve(n_paths - bad);
  for (std::size_t i = 0; i < n_paths; ++i) {
    if (!outcomes[i].diverged) kept.push_back(values[i]);
  }
  Estimate e = sample_mean(kept);
  e.excluded = bad;
  return e;
}

Estimate density_martingale_mean(const SdeCoefficients& coeffs, const ControlPolicy& policy, const TimeGrid& grid,
                                 std::size_t n_paths, std::span<const double> x0, const SimulationOptions& options) {
  const auto problem =
      make_problem(coeffs, policy, CostFunctional::constant(0.0), grid, x0, SamplingMeasure::reference);
  const auto outcomes = simulate_outcomes(problem, n_paths, options);
  return mean_over(outcomes, options, [](const PathOutcome& o) { return std::exp(o.log_density); });
}

IdentityCheck density_drift_identity_check(const ControlPolicy& policy, const TimeGrid& grid, std::size_t n_paths,
                                           double r, const SimulationOptions& options) {
  if (policy.dim != 1) throw DimensionError("the drift identity check is one-dimensional");
  if (r < 0.0 || r > grid.horizon()) throw DomainError("r must lie in [0, T]");
  const std::size_t k_r = grid.index_at_or_before(r);
  const double dt = grid.dt();
  const auto problem = make_problem(SdeCoefficients::brownian(1), policy, CostFunctional::constant(0.0), grid,
                                    std::vector<double>{0.0}, SamplingMeasure::reference);
  validate_problem(problem);
  validate_options(options);
  std::vector<double> lhs(n_paths), rhs(n_paths);
  std::vector<PathOutcome> outcomes(n_paths);
  for_each_index(n_paths, options.exec, [&](std::size_t i) {
    detail::StepWorkspace ws(1, 1);
    std::vector<double> x(1);
    double log_z = 0.0;  // ln Z_k before step k
    double w_r = 0.0;
    double drift_sum = 0.0;
    outcomes[i] = walk_path(problem, i, options, ws, x,
                            [&](std::size_t k, double, std::span<const double> state, double,
                                std::span<const double> u, std::span<const double> dw) {
                              const double uk = policy.is_zero() ? 0.0 : u[0];
                              if (k < k_r) drift_sum += uk * std::exp(log_z) * dt;
                              if (k == k_r) w_r = state[0];
                              log_z += uk * dw[0] - 0.5 * uk * uk * dt;
                            });
    if (k_r == grid.steps()) w_r = outcomes[i].terminal;
    lhs[i] = std::exp(outcomes[i].log_density) * w_r;
    rhs[i] = drift_sum;
  });
  check_divergence(outcomes, options);
  std::vector<double> diff(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) diff[i] = lhs[i] - rhs[i];
  IdentityCheck out;
  out.lhs = sample_mean(lhs).value;
  out.rhs = sample_mean(rhs).value;
  out.std_error = sample_mean(diff).std_error;
  return out;
}

}  // namespace entropic
