#include "entropic/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "entropic/detail/euler.hpp"
#include "entropic/error.hpp"
#include "entropic/rng.hpp"

namespace entropic {

MalliavinCost MalliavinCost::quadratic_terminal(double target) {
  MalliavinCost c;
  c.summary = SummaryKind::terminal_value;
  c.cost = [target](const Continuation& e) { return 0.5 * (e.w_terminal - target) * (e.w_terminal - target); };
  c.derivative = [target](const Continuation& e) { return e.w_terminal - target; };
  return c;
}

MalliavinCost MalliavinCost::running_maximum() {
  MalliavinCost c;
  c.summary = SummaryKind::value_and_max;
  c.cost = [](const Continuation& e) { return e.m_terminal; };
  c.derivative = [](const Continuation& e) { return e.max_after_t ? 1.0 : 0.0; };
  return c;
}

MalliavinCost MalliavinCost::constant(double k) {
  MalliavinCost c;
  c.cost = [k](const Continuation&) { return k; };
  c.derivative = [](const Continuation&) { return 0.0; };
  return c;
}

namespace {

constexpr double kLogDegenerate = -690.7755278982137;  // ln 1e-300

void validate(const MalliavinCost& cost, double beta, const PathSummary& state, const TimeGrid& grid,
              std::size_t n_inner) {
  if (!cost.cost || !cost.derivative) throw DomainError("Malliavin cost is incomplete");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (n_inner < 2) throw DomainError("need at least two inner continuations");
  if (state.t < 0.0 || state.t >= grid.horizon()) throw DomainError("conditioning time must lie in [0, T)");
  if (cost.summary == SummaryKind::value_and_max && state.m < state.w)
    throw DomainError("running maximum below the current value");
}

// Continuation of W from (t, w, m) over the rest of the grid.
Continuation continue_path(const PathSummary& state, const TimeGrid& grid, std::uint64_t seed, std::size_t replica,
                           MaxMonitoring monitoring) {
  const double remaining = grid.horizon() - state.t;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(remaining / grid.dt() - 1e-9)));
  const double dt = remaining / static_cast<double>(steps);
  const double sd = std::sqrt(dt);
  PathStream normals(seed, replica, StreamTag::inner);
  PathStream uniforms(seed, replica, StreamTag::bridge_max);
  double w = state.w;
  double m_after = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < steps; ++k) {
    const double next = w + sd * normals.normal(k);
    const double step_max =
        monitoring == MaxMonitoring::bridge ? detail::bridge_maximum(w, next, dt, uniforms.uniform(k)) : next;
    m_after = std::max(m_after, step_max);
    w = next;
  }
  Continuation c;
  c.w_terminal = w;
  // ties go to the earliest index, i.e. to the prefix
  c.max_after_t = m_after > state.m;
  c.m_terminal = std::max(state.m, m_after);
  return c;
}

struct InnerSample {
  std::vector<double> cost;
  std::vector<double> derivative;
};

InnerSample sample_inner(const MalliavinCost& cost, const PathSummary& state, const TimeGrid& grid,
                         std::size_t n_inner, const NestedOptions& options) {
  PathSummary start = state;
  if (cost.summary == SummaryKind::terminal_value) start.m = state.w;
  InnerSample s{std::vector<double>(n_inner), std::vector<double>(n_inner)};
  for_each_index(n_inner, options.exec, [&](std::size_t i) {
    const auto c = continue_path(start, grid, options.seed, i, options.max_monitoring);
    s.cost[i] = cost.cost(c);
    s.derivative[i] = cost.derivative(c);
  });
  return s;
}

struct WeightedRatio {
  double log_weight;  // ln mean exp(-beta C)
  double log_weight_se;
  double ratio;       // mean(w D) / mean(w)
  double ratio_se;
};

WeightedRatio weighted_ratio(const InnerSample& s, double beta) {
  const std::size_t n = s.cost.size();
  const double shift = *std::min_element(s.cost.begin(), s.cost.end());
  std::vector<double> w(n), wd(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(-beta * (s.cost[i] - shift));
    wd[i] = w[i] * s.derivative[i];
  }
  const Estimate wm = sample_mean(w);
  const Estimate wdm = sample_mean(wd);
  const double ratio = wdm.value / wm.value;
  std::vector<double> lin(n);
  for (std::size_t i = 0; i < n; ++i) lin[i] = wd[i] - ratio * w[i];
  const Estimate linm = sample_mean(lin);
  return {std::log(wm.value) - beta * shift, wm.std_error / wm.value, ratio, linm.std_error / wm.value};
}

}  // namespace

Estimate malliavin_control(const MalliavinCost& cost, double beta, const PathSummary& state, const TimeGrid& grid,
                           std::size_t n_inner, const NestedOptions& options) {
  validate(cost, beta, state, grid, n_inner);
  const auto r = weighted_ratio(sample_inner(cost, state, grid, n_inner, options), beta);
  if (r.log_weight < kLogDegenerate) throw NumericError("degenerate conditioning: E[exp(-beta C) | F_t] < 1e-300");
  Estimate e;
  e.value = -beta * r.ratio;
  e.std_error = beta * r.ratio_se;
  e.samples = n_inner;
  return e;
}

Estimate conditional_log_weight(const MalliavinCost& cost, double beta, const PathSummary& state,
                                const TimeGrid& grid, std::size_t n_inner, const NestedOptions& options) {
  validate(cost, beta, state, grid, n_inner);
  const auto r = weighted_ratio(sample_inner(cost, state, grid, n_inner, options), beta);
  Estimate e;
  e.value = r.log_weight;
  e.std_error = r.log_weight_se;
  e.samples = n_inner;
  return e;
}

ResidualEstimate clark_ocone_residual(const MalliavinCost& cost, double beta, const TimeGrid& grid,
                                      std::size_t n_paths, std::size_t n_inner, const NestedOptions& options,
                                      const std::optional<ClosedFormProcess>& closed_form) {
  if (n_paths < 2) throw DomainError("need at least two outer paths");
  const double dt = grid.dt();
  const double sd = std::sqrt(dt);
  const bool bridge = options.max_monitoring == MaxMonitoring::bridge;

  NestedOptions inner = options;
  inner.exec = Execution::serial_reference();
  double log_k = 0.0;
  if (!closed_form) {
    inner.seed = mix_seed(options.seed, ~std::uint64_t{0});
    log_k = conditional_log_weight(cost, beta, PathSummary{}, grid, n_inner, inner).value;
  }

  std::vector<double> squared(n_paths);
  for_each_index(n_paths, options.exec, [&](std::size_t i) {
    PathStream normals(options.seed, i, StreamTag::brownian);
    PathStream uniforms(options.seed, i, StreamTag::bridge_max);
    NestedOptions local = inner;
    double w = 0.0;
    double m = 0.0;
    double integral = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const PathSummary s{grid.time(k), w, m};
      double v, z;
      if (closed_form) {
        v = closed_form->control(s);
        z = closed_form->density(s);
      } else {
        local.seed = mix_seed(options.seed, i * (grid.steps() + 1) + k);
        const auto r = weighted_ratio(sample_inner(cost, s, grid, n_inner, local), beta);
        v = -beta * r.ratio;
        z = std::exp(r.log_weight - log_k);
      }
      const double dw = sd * normals.normal(k);
      integral += v * z * dw;
      const double next = w + dw;
      m = std::max(m, bridge ? detail::bridge_maximum(w, next, dt, uniforms.uniform(k)) : next);
      w = next;
    }
    const PathSummary end{grid.horizon(), w, m};
    double z_terminal;
    if (closed_form) {
      z_terminal = closed_form->density(end);
    } else {
      const Continuation c{w, m, false};
      z_terminal = std::exp(-beta * cost.cost(c) - log_k);
    }
    const double r = z_terminal - 1.0 - integral;
    squared[i] = r * r;
  });
  const Estimate ms = sample_mean(squared);
  ResidualEstimate out;
  out.residual = std::sqrt(ms.value);
  out.std_error = out.residual > 0.0 ? ms.std_error / (2.0 * out.residual) : 0.0;
  return out;
}

}  // namespace entropic
