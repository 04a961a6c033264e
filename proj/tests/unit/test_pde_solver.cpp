#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "entropic/error.hpp"
#include "entropic/path_engine.hpp"
#include "entropic/pde_solver.hpp"
#include "entropic/policies.hpp"

using namespace entropic;

namespace {

double quadratic_oracle(double beta, double horizon, double target, double t, double x) {
  const double rho = 1.0 + beta * (horizon - t);
  return std::exp(-0.5 * beta * (x - target) * (x - target) / rho) / std::sqrt(rho);
}

// sup over |x - target| <= 3 sqrt(T) and all time nodes
double interior_error(const GridSolution& sol, double beta, double horizon, double target) {
  double err = 0.0;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    for (std::size_t j = 0; j <= sol.nx(); ++j) {
      if (std::abs(sol.x[j] - target) > 3.0 * std::sqrt(horizon)) continue;
      err = std::max(err, std::abs(sol.at(k, j) - quadratic_oracle(beta, horizon, target, sol.times[k], sol.x[j])));
    }
  }
  return err;
}

// y'' (sigma^2 / 2) + b y' - beta phi y = 0 on (lo, hi), y = exp(-beta psi) at both ends
double exit_oracle(double beta, double b, double sigma, double phi, double psi, Interval g, double x) {
  const double s2 = sigma * sigma;
  const double disc = std::sqrt(b * b + 2.0 * s2 * beta * phi);
  const double r1 = (-b + disc) / s2;
  const double r2 = (-b - disc) / s2;
  const double edge = std::exp(-beta * psi);
  // y = A e^{r1 (x - lo)} + B e^{r2 (x - lo)}
  const double l = g.hi - g.lo;
  const double e1 = std::exp(r1 * l), e2 = std::exp(r2 * l);
  const double a = edge * (1.0 - e2) / (e1 - e2);
  const double c = edge - a;
  return a * std::exp(r1 * (x - g.lo)) + c * std::exp(r2 * (x - g.lo));
}

FeynmanKacOptions fk_options(std::uint64_t seed, std::size_t n) {
  FeynmanKacOptions o;
  o.seed = seed;
  o.n_paths = n;
  return o;
}

}  // namespace

TEST_CASE("constant running cost reduces to an ODE") {
  PdeProblem p = quadratic_terminal_problem(2.0, 1.5, 0.0);
  p.running_cost = [](double, double) { return 0.7; };
  p.terminal_cost = [](double, double) { return 0.0; };
  const auto sol = solve_finite_horizon(p, 64, 200);
  double err = 0.0;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    for (std::size_t j = 1; j < sol.nx(); ++j) {
      if (std::abs(sol.x[j]) > 3.0) continue;
      err = std::max(err, std::abs(sol.at(k, j) - std::exp(-2.0 * 0.7 * (1.5 - sol.times[k]))));
    }
  }
  CHECK(err < 1e-4);
}

TEST_CASE("quadratic terminal cost against the Gaussian moment identity") {
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto p = quadratic_terminal_problem(beta, 1.0, 0.3);
    const auto sol = solve_finite_horizon(p, 400, 400);
    const double h = sol.x[1] - sol.x[0];
    CHECK(interior_error(sol, beta, 1.0, 0.3) < h * h);
  }
}

TEST_CASE("doubling the grid quarters the error") {
  const auto p = quadratic_terminal_problem(1.0, 1.0, 0.0);
  std::vector<double> err;
  for (std::size_t n : {50, 100, 200, 400}) err.push_back(interior_error(solve_finite_horizon(p, n, n), 1.0, 1.0, 0.0));
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
    CHECK(std::log2(ratio) > 1.7);
    CHECK(std::log2(ratio) < 2.3);
  }
}

TEST_CASE("exit problem without costs is identically one") {
  const auto p = constant_exit_problem(1.0, 0.3, 1.0, 0.0, 0.0, Interval{-1.0, 2.0});
  const auto sol = solve_exit_problem(p, 64);
  CHECK(sol.stationary);
  const auto u = extract_control(sol, p);
  const auto j = value_function(sol, p);
  for (std::size_t i = 0; i <= sol.nx(); ++i) {
    CHECK(sol.at(0, i) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(u.at(0, i)) < 1e-10);
    CHECK(std::abs(j[i]) < 1e-12);
  }
}

TEST_CASE("exit problem against the cosh solution") {
  const Interval g{-1.0, 1.0};
  const auto p = constant_exit_problem(1.0, 0.0, std::sqrt(2.0), 1.0, 0.0, g);
  double previous = 1.0;
  for (std::size_t n : {40, 80, 160}) {
    const auto sol = solve_exit_problem(p, n);
    const auto u = extract_control(sol, p);
    const double h = sol.x[1] - sol.x[0];
    double y_err = 0.0, u_err = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = sol.x[i];
      y_err = std::max(y_err, std::abs(sol.at(0, i) - std::cosh(x) / std::cosh(1.0)));
      u_err = std::max(u_err, std::abs(u.at(0, i) - std::sqrt(2.0) * std::tanh(x)));
    }
    CHECK(y_err < h * h);
    CHECK(u_err < 2.0 * h * h);
    CHECK(y_err < previous);
    previous = y_err;
  }
  CHECK(solve_exit_problem(p, 200).interpolate(0, 0.0) == doctest::Approx(0.648054273663885400).epsilon(1e-5));
}

TEST_CASE("exit problem with drift and boundary cost") {
  const Interval g{-0.5, 1.5};
  const auto p = constant_exit_problem(0.8, 0.6, 1.3, 0.9, 0.4, g);
  const auto sol = solve_exit_problem(p, 200);
  const double h = sol.x[1] - sol.x[0];
  for (std::size_t i = 0; i <= 200; i += 10)
    CHECK(std::abs(sol.at(0, i) - exit_oracle(0.8, 0.6, 1.3, 0.9, 0.4, g, sol.x[i])) < h * h);
}

TEST_CASE("extracted control matches the bridge feedback") {
  const auto p = quadratic_terminal_problem(1.0, 1.0, 0.0);
  const auto sol = solve_finite_horizon(p, 400, 400);
  const auto u = extract_control(sol, p);
  const double h = sol.x[1] - sol.x[0];
  BridgeSpec spec;
  double err = 0.0;
  for (std::size_t k = 0; k + 1 < sol.times.size(); ++k) {
    for (std::size_t j = 0; j <= sol.nx(); ++j) {
      if (std::abs(sol.x[j]) > 3.0) continue;
      err = std::max(err, std::abs(u.at(k, j) - bridge_control(spec, sol.times[k], sol.x[j])));
    }
  }
  CHECK(err < std::max(1e-3, h * h));
  const auto flat = quadratic_terminal_problem(1.0, 1.0, 0.0);
  PdeProblem zero = flat;
  zero.terminal_cost = [](double, double) { return 0.0; };
  const auto uz = extract_control(solve_finite_horizon(zero, 32, 32), zero);
  for (double v : uz.u) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("value function") {
  PdeProblem trivial = quadratic_terminal_problem(1.0, 1.0, 0.0);
  trivial.terminal_cost = [](double, double) { return 0.0; };
  for (double j : value_function(solve_finite_horizon(trivial, 32, 32), trivial)) CHECK(std::abs(j) < 1e-12);

  // raising phi pointwise raises J* pointwise
  PdeProblem low = quadratic_terminal_problem(1.5, 1.0, 0.2);
  low.running_cost = [](double, double x) { return 0.5 + 0.1 * x * x; };
  PdeProblem high = low;
  high.running_cost = [](double, double x) { return 0.8 + 0.1 * x * x + 0.05 * std::sin(x); };
  const auto jl = value_function(solve_finite_horizon(low, 100, 100), low);
  const auto jh = value_function(solve_finite_horizon(high, 100, 100), high);
  for (std::size_t i = 1; i + 1 < jl.size(); ++i) CHECK(jh[i] > jl[i]);
}

TEST_CASE("Feynman-Kac examples") {
  PdeProblem trivial = quadratic_terminal_problem(1.0, 1.0, 0.0);
  trivial.terminal_cost = [](double, double) { return 0.0; };
  const Estimate one = feynman_kac_mc(trivial, 0.2, 0.3, fk_options(1, 500));
  CHECK(one.value == 1.0);
  CHECK(one.std_error == 0.0);

  const auto quad = quadratic_terminal_problem(1.0, 1.0, 0.0);
  const Estimate q = feynman_kac_mc(quad, 0.0, 0.0, fk_options(2, 20000));
  CHECK(within_sigma(q.value, 1.0 / std::sqrt(2.0), q.std_error, 3.0, 0.0));
  const Estimate q2 = feynman_kac_mc(quad, 0.5, 0.8, fk_options(3, 20000));
  CHECK(within_sigma(q2.value, quadratic_oracle(1.0, 1.0, 0.0, 0.5, 0.8), q2.std_error, 3.0, 0.0));

  const auto exit = constant_exit_problem(1.0, 0.0, std::sqrt(2.0), 1.0, 0.0, Interval{-1.0, 1.0});
  auto opts = fk_options(4, 10000);
  const Estimate e = feynman_kac_exit_mc(exit, 0.0, opts);
  CHECK(within_sigma(e.value, 0.648054273663885400, e.std_error, 3.0, std::sqrt(opts.dt)));
}

TEST_CASE("PDE and Feynman-Kac agree at interior points") {
  PdeProblem p = quadratic_terminal_problem(1.0, 1.0, 0.0);
  p.drift = [](double, double x) { return -0.4 * x; };
  p.running_cost = [](double, double x) { return 0.2 * std::cos(x); };
  const auto sol = solve_finite_horizon(p, 400, 400);
  const double h = sol.x[1] - sol.x[0];
  std::uint64_t seed = 10;
  for (double x : {-1.5, -0.5, 0.0, 0.7, 1.6}) {
    const Estimate fk = feynman_kac_mc(p, 0.0, x, fk_options(seed++, 10000));
    CHECK(within_sigma(fk.value, sol.interpolate(0, x), fk.std_error, 3.0, h * h));
  }
}

TEST_CASE("the extracted control is optimal") {
  const auto p = quadratic_terminal_problem(1.0, 1.0, 0.0);
  const auto sol = solve_finite_horizon(p, 200, 200);
  const auto control = extract_control(sol, p);
  const auto j = value_function(sol, p);
  SimulationOptions opts;
  opts.seed = 5;
  const std::vector<double> x0{0.5};
  const Estimate cost = estimate_cost(SdeCoefficients::brownian(), interpolated_policy(control),
                                      CostFunctional::quadratic_terminal(0.0), TimeGrid(1.0, 200), 20000, 1.0, x0, opts);
  const double j_pde = -std::log(sol.interpolate(0, 0.5));
  CHECK(within_sigma(cost.value, j_pde, cost.std_error, 3.0, 2e-3));
  const double h = sol.x[1] - sol.x[0];
  CHECK(std::abs(j_pde - (0.5 * std::log(2.0) + 0.0625)) < h * h);
  CHECK(std::abs(j[sol.nx() / 2] - 0.5 * std::log(2.0)) < h * h);
}

TEST_CASE("positivity failures are reported") {
  // Crank-Nicolson with beta phi dt far above 2 flips the sign of the interior
  PdeProblem p = quadratic_terminal_problem(1.0, 1.0, 0.0);
  p.running_cost = [](double, double) { return 100.0; };
  p.terminal_cost = [](double, double) { return 0.0; };
  CHECK_THROWS_AS(solve_finite_horizon(p, 16, 8), PositivityError);
}

TEST_CASE("invalid problems") {
  const auto q = quadratic_terminal_problem(1.0, 1.0, 0.0);
  CHECK_THROWS_AS(solve_finite_horizon(q, 4, 100), DomainError);
  CHECK_THROWS_AS(solve_finite_horizon(q, 100, 4), DomainError);
  CHECK_THROWS_AS(solve_exit_problem(q, 100), DomainError);
  CHECK_THROWS_AS(solve_finite_horizon(quadratic_terminal_problem(0.0, 1.0, 0.0), 16, 16), DomainError);
  CHECK_THROWS_AS(solve_finite_horizon(quadratic_terminal_problem(1.0, -1.0, 0.0), 16, 16), DomainError);
  CHECK_THROWS_AS(constant_exit_problem(1.0, 0.0, 1.0, 0.0, 0.0, Interval{1.0, -1.0}).validate(), DomainError);
  const auto degenerate = constant_exit_problem(1.0, 0.0, 1e-9, 1.0, 0.0, Interval{-1.0, 1.0});
  CHECK_THROWS_AS(solve_exit_problem(degenerate, 16), DomainError);
  const auto exit = constant_exit_problem(1.0, 0.0, 1.0, 1.0, 0.0, Interval{-1.0, 1.0});
  CHECK_THROWS_AS(feynman_kac_exit_mc(exit, 2.0, fk_options(1, 10)), DomainError);
  CHECK_THROWS_AS(feynman_kac_mc(q, 1.0, 0.0, fk_options(1, 10)), DomainError);
}

TEST_CASE("solution csv") {
  const auto p = quadratic_terminal_problem(1.0, 1.0, 0.0);
  const auto sol = solve_finite_horizon(p, 10, 8);
  std::ostringstream out;
  write_solution_csv(sol, extract_control(sol, p), p, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# entropic pde_solution v1");
  std::getline(in, line);
  CHECK(line == "t,x,y,u_star,J_star");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 9 * 11);
}
