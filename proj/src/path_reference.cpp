// Materialized path bundles: the straightforward serial route that the fused kernel in
// path_engine.cpp must reproduce bit for bit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "entropic/csv.hpp"
#include "entropic/detail/euler.hpp"
#include "entropic/error.hpp"
#include "entropic/path_engine.hpp"

namespace entropic {

std::span<const double> PathBundle::increment(std::size_t path, std::size_t step) const {
  return std::span<const double>(increments).subspan((path * grid.steps() + step) * noise_dim, noise_dim);
}

std::span<const double> PathBundle::state(std::size_t path, std::size_t node) const {
  return std::span<const double>(states).subspan((path * (grid.steps() + 1) + node) * state_dim, state_dim);
}

PathBundle sample_paths(const TimeGrid& grid, std::size_t n_paths, std::size_t noise_dim,
                        const SimulationOptions& options) {
  if (n_paths == 0) throw DomainError("need at least one path");
  if (noise_dim == 0) throw DimensionError("noise dimension must be positive");
  if (options.substeps == 0) throw DomainError("substeps must be >= 1");
  PathBundle b;
  b.grid = grid;
  b.n_paths = n_paths;
  b.noise_dim = noise_dim;
  b.options = options;
  b.increments.resize(n_paths * grid.steps() * noise_dim);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto id = detail::stream_for_path(i, options.antithetic);
    PathStream normals(options.seed, id.stream, StreamTag::brownian);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      auto out = std::span<double>(b.increments).subspan((i * grid.steps() + k) * noise_dim, noise_dim);
      detail::draw_increment(normals, k, options.substeps, grid.dt(), id.sign, out);
    }
  }
  return b;
}

namespace {

PathBundle integrate_bundle(const SdeCoefficients& coeffs, const ControlPolicy& policy, const PathBundle& bundle,
                            std::span<const double> x0, SamplingMeasure measure, double t0) {
  coeffs.validate();
  if (bundle.noise_dim != coeffs.noise_dim || policy.dim != coeffs.noise_dim)
    throw DimensionError("bundle, SDE and control dimensions disagree");
  if (x0.size() != coeffs.state_dim) throw DimensionError("x0 does not match the state dimension");

  PathBundle out = bundle;
  const std::size_t n = coeffs.state_dim;
  const std::size_t p = coeffs.noise_dim;
  const std::size_t nodes = bundle.grid.steps() + 1;
  const double dt = bundle.grid.dt();
  const bool zero = policy.is_zero();
  const bool bridge = bundle.options.max_monitoring == MaxMonitoring::bridge;
  out.state_dim = n;
  out.states.assign(bundle.n_paths * nodes * n, std::numeric_limits<double>::quiet_NaN());
  out.running_max.assign(bundle.n_paths * nodes, std::numeric_limits<double>::quiet_NaN());
  out.log_density.assign(bundle.n_paths * nodes, std::numeric_limits<double>::quiet_NaN());
  out.diverged.assign(bundle.n_paths, 0);

  detail::StepWorkspace ws(n, p);
  for (std::size_t i = 0; i < bundle.n_paths; ++i) {
    const auto id = detail::stream_for_path(i, bundle.options.antithetic);
    PathStream uniforms(bundle.options.seed, id.stream, StreamTag::bridge_max);
    auto node_state = [&](std::size_t k) {
      return std::span<double>(out.states).subspan((i * nodes + k) * n, n);
    };
    std::copy(x0.begin(), x0.end(), node_state(0).begin());
    out.running_max[i * nodes] = x0[0];
    out.log_density[i * nodes] = 0.0;
    for (std::size_t k = 0; k < bundle.grid.steps(); ++k) {
      const double t = t0 + bundle.grid.time(k);
      auto x = node_state(k);
      const double m = out.running_max[i * nodes + k];
      if (!zero) {
        policy.eval(PolicyInput{t, x, m}, ws.u);
        if (!detail::all_finite(ws.u)) {
          out.diverged[i] = 1;
          break;
        }
      }
      const auto inc = bundle.increment(i, k);
      std::copy(inc.begin(), inc.end(), ws.sampled.begin());
      const auto step = detail::euler_step(coeffs, zero, measure, t, dt, x, ws);
      out.log_density[i * nodes + k + 1] = out.log_density[i * nodes + k] + step.log_density;
      if (!detail::all_finite(ws.next)) {
        out.diverged[i] = 1;
        break;
      }
      double m_next;
      if (bridge) {
        const double var = detail::first_component_variance(ws.sigma, p) * dt;
        m_next = std::max(m, detail::bridge_maximum(x[0], ws.next[0], var, uniforms.uniform(k)));
      } else {
        m_next = std::max(m, ws.next[0]);
      }
      out.running_max[i * nodes + k + 1] = m_next;
      std::copy(ws.next.begin(), ws.next.end(), node_state(k + 1).begin());
    }
  }
  return out;
}

}  // namespace

PathBundle integrate_controlled(const SdeCoefficients& coeffs, const ControlPolicy& policy, const PathBundle& bundle,
                                std::span<const double> x0, SamplingMeasure measure) {
  return integrate_bundle(coeffs, policy, bundle, x0, measure, 0.0);
}

std::vector<PathOutcome> simulate_outcomes_reference(const PathProblem& problem, std::size_t n_paths,
                                                     const SimulationOptions& options) {
  const auto raw = sample_paths(problem.grid, n_paths, problem.coeffs.noise_dim, options);
  const auto bundle = integrate_bundle(problem.coeffs, problem.policy, raw, problem.x0, problem.measure, problem.t0);
  const auto& grid = problem.grid;
  const double dt = grid.dt();
  const bool zero = problem.policy.is_zero();

  std::vector<PathOutcome> outcomes(n_paths);
  std::vector<double> u(problem.policy.dim);
  std::vector<double> x(problem.coeffs.state_dim);
  for (std::size_t i = 0; i < n_paths; ++i) {
    PathOutcome& o = outcomes[i];
    if (bundle.diverged[i]) {
      o.diverged = true;
      o.cost = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double running = 0.0;
    double phi_prev = problem.cost.running ? problem.cost.running(problem.t0, bundle.state(i, 0)) : 0.0;
    std::size_t stop = grid.steps();
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      if (!zero) {
        problem.policy.eval(PolicyInput{problem.t0 + grid.time(k), bundle.state(i, k), bundle.max_at(i, k)}, u);
        double usq = 0.0;
        for (double uj : u) usq += uj * uj;
        o.control_energy += 0.5 * usq * dt;
      }
      const auto next = bundle.state(i, k + 1);
      if (problem.cost.running) {
        const double phi = problem.cost.running(problem.t0 + grid.time(k + 1), next);
        running += 0.5 * (phi_prev + phi) * dt;
        phi_prev = phi;
      }
      if (problem.cost.exit_domain && !problem.cost.exit_domain->contains(next[0])) {
        stop = k + 1;
        break;
      }
    }
    const auto final_state = bundle.state(i, stop);
    std::copy(final_state.begin(), final_state.end(), x.begin());
    double m = bundle.max_at(i, stop);
    if (stop < grid.steps() || (problem.cost.exit_domain && !problem.cost.exit_domain->contains(x[0]))) {
      x[0] = problem.cost.exit_domain->clamp(x[0]);
      m = std::min(m, problem.cost.exit_domain->hi);
    }
    o.log_density = bundle.log_density_at(i, stop);
    o.stop_time = problem.t0 + grid.time(stop);
    o.terminal = x[0];
    o.running_max = m;
    o.cost = running + problem.cost.terminal(o.stop_time, x, m);
    if (!std::isfinite(o.cost)) o.diverged = true;
  }
  return outcomes;
}

void write_bundle_csv(const PathBundle& bundle, std::ostream& out) {
  out << "# entropic path_bundle v1\n";
  out << "path_id,t";
  for (std::size_t j = 0; j < bundle.state_dim; ++j) out << ",x" << j;
  out << ",running_max,log_density\n";
  const std::size_t nodes = bundle.grid.steps() + 1;
  for (std::size_t i = 0; i < bundle.n_paths; ++i) {
    for (std::size_t k = 0; k < nodes; ++k) {
      out << i << ',' << format_double(bundle.grid.time(k));
      for (double v : bundle.state(i, k)) out << ',' << format_double(v);
      out << ',' << format_double(bundle.max_at(i, k)) << ',' << format_double(bundle.log_density_at(i, k)) << '\n';
    }
  }
}

}  // namespace entropic
