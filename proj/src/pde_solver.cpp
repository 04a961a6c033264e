#include "entropic/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "entropic/csv.hpp"
#include "entropic/error.hpp"

namespace entropic {

void PdeProblem::validate() const {
  if (!drift || !sigma || !running_cost || !terminal_cost) throw DomainError("PDE coefficients are not set");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive and finite");
  if (domain && !(domain->lo < domain->hi)) throw DomainError("domain must satisfy lo < hi");
  if (!(ellipticity_floor > 0.0)) throw DomainError("ellipticity floor must be positive");
}

Interval PdeProblem::grid_domain() const {
  if (domain) return *domain;
  const double half = 8.0 * std::abs(sigma(0.0, truncation_center)) * std::sqrt(horizon);
  if (!(half > 0.0)) throw DomainError("cannot truncate a degenerate diffusion");
  return {truncation_center - half, truncation_center + half};
}

PdeProblem quadratic_terminal_problem(double beta, double horizon, double target) {
  PdeProblem p;
  p.drift = [](double, double) { return 0.0; };
  p.sigma = [](double, double) { return 1.0; };
  p.running_cost = [](double, double) { return 0.0; };
  p.terminal_cost = [target](double, double x) { return 0.5 * (x - target) * (x - target); };
  p.horizon = horizon;
  p.beta = beta;
  p.truncation_center = target;
  return p;
}

PdeProblem constant_exit_problem(double beta, double drift, double sigma, double phi, double psi, Interval domain) {
  PdeProblem p;
  p.drift = [drift](double, double) { return drift; };
  p.sigma = [sigma](double, double) { return sigma; };
  p.running_cost = [phi](double, double) { return phi; };
  p.terminal_cost = [psi](double, double) { return psi; };
  p.domain = domain;
  p.beta = beta;
  return p;
}

double GridSolution::interpolate(std::size_t k, double xv) const {
  const double lo = x.front();
  const double h = x[1] - x[0];
  const double s = std::clamp((xv - lo) / h, 0.0, static_cast<double>(nx()));
  const auto j = std::min(static_cast<std::size_t>(s), nx() - 1);
  const double w = s - static_cast<double>(j);
  return (1.0 - w) * at(k, j) + w * at(k, j + 1);
}

namespace {

// Solves a_j y_{j-1} + b_j y_j + c_j y_{j+1} = d_j in place (Thomas algorithm); d holds the result.
void solve_tridiagonal(const std::vector<double>& a, std::vector<double> b, std::vector<double> c,
                       std::vector<double>& d) {
  const std::size_t n = d.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const double m = a[j] / b[j - 1];
      b[j] -= m * c[j - 1];
      d[j] -= m * d[j - 1];
    }
    const double scale = std::abs(a[j]) + std::abs(c[j]) + 1.0;
    if (!(std::abs(b[j]) > 1e-14 * scale)) throw NumericError("singular pivot in tridiagonal solve");
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t j = n - 1; j-- > 0;) d[j] = (d[j] - c[j] * d[j + 1]) / b[j];
  for (double v : d) {
    if (!std::isfinite(v)) throw NumericError("tridiagonal solve produced non-finite values");
  }
}

std::vector<double> nodes(const Interval& d, std::size_t nx) {
  std::vector<double> x(nx + 1);
  const double h = (d.hi - d.lo) / static_cast<double>(nx);
  for (std::size_t j = 0; j <= nx; ++j) x[j] = d.lo + static_cast<double>(j) * h;
  x[nx] = d.hi;
  return x;
}

// Coefficients of (A y)_j = l_j y_{j-1} + c_j y_j + r_j y_{j+1} for A = b d/dx + s^2/2 d2/dx2 - beta phi.
struct Stencil {
  double l, c, r;
};

Stencil stencil(const PdeProblem& p, double t, double x, double h) {
  const double s = p.sigma(t, x);
  const double diff = 0.5 * s * s;
  if (!(diff >= 0.5 * p.ellipticity_floor)) throw DomainError("diffusion below the ellipticity floor");
  const double b = p.drift(t, x);
  const double phi = p.running_cost(t, x);
  const double d2 = diff / (h * h);
  const double d1 = b / (2.0 * h);
  return {d2 - d1, -2.0 * d2 - p.beta * phi, d2 + d1};
}

void check_positive(const std::vector<double>& y, double t, const std::vector<double>& x) {
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (!(y[j] > 0.0)) throw PositivityError(t, x[j], y[j]);
  }
}

}  // namespace

GridSolution solve_finite_horizon(const PdeProblem& problem, std::size_t nx, std::size_t nt) {
  problem.validate();
  if (nx < 8 || nt < 8) throw DomainError("nx and nt must be at least 8");
  const Interval d = problem.grid_domain();
  GridSolution sol;
  sol.x = nodes(d, nx);
  const TimeGrid tg(problem.horizon, nt);
  sol.times.resize(nt + 1);
  for (std::size_t k = 0; k <= nt; ++k) sol.times[k] = tg.time(k);
  sol.y.assign((nt + 1) * (nx + 1), 0.0);

  const double h = (d.hi - d.lo) / static_cast<double>(nx);
  const double dt = tg.dt();
  const double beta = problem.beta;
  std::vector<double> next(nx + 1), rhs(nx + 1), a(nx + 1), b(nx + 1), c(nx + 1);
  for (std::size_t j = 0; j <= nx; ++j) next[j] = std::exp(-beta * problem.terminal_cost(problem.horizon, sol.x[j]));
  check_positive(next, problem.horizon, sol.x);
  std::copy(next.begin(), next.end(), sol.y.begin() + static_cast<std::ptrdiff_t>(nt * (nx + 1)));

  for (std::size_t k = nt; k-- > 0;) {
    const double t = sol.times[k];
    const double tm = 0.5 * (t + sol.times[k + 1]);
    for (std::size_t j = 1; j < nx; ++j) {
      const Stencil s = stencil(problem, tm, sol.x[j], h);
      rhs[j] = next[j] + 0.5 * dt * (s.l * next[j - 1] + s.c * next[j] + s.r * next[j + 1]);
      a[j] = -0.5 * dt * s.l;
      b[j] = 1.0 - 0.5 * dt * s.c;
      c[j] = -0.5 * dt * s.r;
    }
    a[0] = c[0] = a[nx] = c[nx] = 0.0;
    b[0] = b[nx] = 1.0;
    rhs[0] = std::exp(-beta * problem.terminal_cost(t, sol.x[0]));
    rhs[nx] = std::exp(-beta * problem.terminal_cost(t, sol.x[nx]));
    solve_tridiagonal(a, b, c, rhs);
    check_positive(rhs, t, sol.x);
    std::copy(rhs.begin(), rhs.end(), sol.y.begin() + static_cast<std::ptrdiff_t>(k * (nx + 1)));
    next.swap(rhs);
    rhs.resize(nx + 1);
  }
  return sol;
}

GridSolution solve_exit_problem(const PdeProblem& problem, std::size_t nx) {
  problem.validate();
  if (!problem.domain) throw DomainError("the exit problem needs a bounded domain");
  if (nx < 8) throw DomainError("nx must be at least 8");
  const Interval d = *problem.domain;
  GridSolution sol;
  sol.stationary = true;
  sol.times = {0.0};
  sol.x = nodes(d, nx);
  const double h = (d.hi - d.lo) / static_cast<double>(nx);
  std::vector<double> a(nx + 1, 0.0), b(nx + 1, 1.0), c(nx + 1, 0.0), rhs(nx + 1, 0.0);
  for (std::size_t j = 1; j < nx; ++j) {
    const Stencil s = stencil(problem, 0.0, sol.x[j], h);
    a[j] = s.l;
    b[j] = s.c;
    c[j] = s.r;
  }
  rhs[0] = std::exp(-problem.beta * problem.terminal_cost(0.0, d.lo));
  rhs[nx] = std::exp(-problem.beta * problem.terminal_cost(0.0, d.hi));
  solve_tridiagonal(a, b, c, rhs);
  check_positive(rhs, 0.0, sol.x);
  sol.y = std::move(rhs);
  return sol;
}

ControlGrid extract_control(const GridSolution& sol, const PdeProblem& problem) {
  ControlGrid g;
  g.times = sol.times;
  g.x = sol.x;
  const std::size_t n = sol.x.size();
  const double h = sol.x[1] - sol.x[0];
  g.u.resize(sol.y.size());
  std::vector<double> ly(n);
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double y = sol.at(k, j);
      if (!(y > 0.0)) throw PositivityError(sol.times[k], sol.x[j], y);
      ly[j] = std::log(y);
    }
    for (std::size_t j = 0; j < n; ++j) {
      double dly;
      if (j == 0)
        dly = (-3.0 * ly[0] + 4.0 * ly[1] - ly[2]) / (2.0 * h);
      else if (j == n - 1)
        dly = (3.0 * ly[n - 1] - 4.0 * ly[n - 2] + ly[n - 3]) / (2.0 * h);
      else
        dly = (ly[j + 1] - ly[j - 1]) / (2.0 * h);
      g.u[k * n + j] = problem.sigma(sol.times[k], sol.x[j]) * dly;
    }
  }
  return g;
}

std::vector<double> value_function(const GridSolution& sol, const PdeProblem& problem) {
  std::vector<double> j(sol.x.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const double y = sol.at(0, i);
    if (!(y > 0.0)) throw PositivityError(sol.times[0], sol.x[i], y);
    j[i] = -std::log(y) / problem.beta;
  }
  return j;
}

ControlPolicy interpolated_policy(const ControlGrid& control) {
  auto g = std::make_shared<const ControlGrid>(control);
  return ControlPolicy::markov([g](double t, double x) {
    const std::size_t n = g->x.size();
    const double h = g->x[1] - g->x[0];
    const double s = std::clamp((x - g->x.front()) / h, 0.0, static_cast<double>(n - 1));
    const auto j = std::min(static_cast<std::size_t>(s), n - 2);
    const double w = s - static_cast<double>(j);
    auto at_time = [&](std::size_t k) { return (1.0 - w) * g->at(k, j) + w * g->at(k, j + 1); };
    if (g->times.size() == 1) return at_time(0);
    const double dt = g->times[1] - g->times[0];
    const double r = std::clamp((t - g->times.front()) / dt, 0.0, static_cast<double>(g->times.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(r), g->times.size() - 2);
    const double v = r - static_cast<double>(k);
    return (1.0 - v) * at_time(k) + v * at_time(k + 1);
  });
}

namespace {

Estimate fk_estimate(const PdeProblem& problem, double t, double x, double horizon, bool stationary,
                     const FeynmanKacOptions& options) {
  if (!(options.dt > 0.0)) throw DomainError("dt must be positive");
  if (problem.domain && !problem.domain->contains(x)) throw DomainError("start point must be interior");
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / options.dt - 1e-9)));
  PathProblem pp;
  auto drift = problem.drift;
  auto sigma = problem.sigma;
  auto phi = problem.running_cost;
  auto psi = problem.terminal_cost;
  if (stationary) {
    pp.coeffs = SdeCoefficients::scalar([drift](double, double y) { return drift(0.0, y); },
                                        [sigma](double, double y) { return sigma(0.0, y); });
    pp.cost.running = [phi](double, std::span<const double> y) { return phi(0.0, y[0]); };
    pp.cost.terminal = [psi](double, std::span<const double> y, double) { return psi(0.0, y[0]); };
  } else {
    pp.coeffs = SdeCoefficients::scalar(drift, sigma);
    pp.cost.running = [phi](double s, std::span<const double> y) { return phi(s, y[0]); };
    pp.cost.terminal = [psi](double s, std::span<const double> y, double) { return psi(s, y[0]); };
  }
  pp.cost.exit_domain = problem.domain;
  pp.grid = TimeGrid(horizon, steps);
  pp.x0 = {x};
  pp.t0 = t;
  pp.measure = SamplingMeasure::reference;
  SimulationOptions so;
  so.seed = options.seed;
  so.exec = options.exec;
  return exponential_weight_mc(pp, options.n_paths, problem.beta, so);
}

}  // namespace

Estimate feynman_kac_mc(const PdeProblem& problem, double t, double x, const FeynmanKacOptions& options) {
  problem.validate();
  if (!(t >= 0.0 && t < problem.horizon)) throw DomainError("t must lie in [0, T)");
  return fk_estimate(problem, t, x, problem.horizon - t, false, options);
}

Estimate feynman_kac_exit_mc(const PdeProblem& problem, double x, const FeynmanKacOptions& options) {
  problem.validate();
  if (!problem.domain) throw DomainError("the exit problem needs a bounded domain");
  if (!(options.max_time > 0.0)) throw DomainError("max_time must be positive");
  return fk_estimate(problem, 0.0, x, options.max_time, true, options);
}

void write_solution_csv(const GridSolution& sol, const ControlGrid& control, const PdeProblem& problem,
                        std::ostream& out) {
  CsvWriter csv(out, "entropic pde_solution", 1, {"t", "x", "y", "u_star", "J_star"});
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    for (std::size_t j = 0; j < sol.x.size(); ++j) {
      const double y = sol.at(k, j);
      csv.cell(sol.times[k]).cell(sol.x[j]).cell(y).cell(control.at(k, j)).cell(-std::log(y) / problem.beta).end_row();
    }
  }
}

}  // namespace entropic
