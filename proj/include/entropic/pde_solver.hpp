#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "entropic/parallel.hpp"
#include "entropic/path_engine.hpp"
#include "entropic/stats.hpp"

namespace entropic {

/// One-dimensional linearized HJB data: L y - beta phi y = 0 with y = exp(-beta psi) on the boundary.
///
/// For the exit problem the coefficients are evaluated at t = 0.
struct PdeProblem {
  std::function<double(double t, double x)> drift;
  std::function<double(double t, double x)> sigma;
  std::function<double(double t, double x)> running_cost;
  std::function<double(double t, double x)> terminal_cost;
  std::optional<Interval> domain;  // unbounded when empty
  double horizon = 1.0;
  double beta = 1.0;
  double truncation_center = 0.0;  // an unbounded domain becomes center +- 8 |sigma| sqrt(T)
  double ellipticity_floor = 1e-10;

  void validate() const;
  // the computational interval
  Interval grid_domain() const;
};

// dX = dW, phi = 0, psi = (x - target)^2 / 2 on the whole line.
PdeProblem quadratic_terminal_problem(double beta, double horizon, double target);
// Exit problem on (lo, hi) with constant drift, diffusion and running cost, psi = boundary.
PdeProblem constant_exit_problem(double beta, double drift, double sigma, double phi, double psi, Interval domain);

struct GridSolution {
  std::vector<double> times;  // ascending; a single 0 for the exit problem
  std::vector<double> x;      // nx + 1 nodes
  std::vector<double> y;      // [time][x]
  bool stationary = false;

  std::size_t nx() const noexcept { return x.size() - 1; }
  double at(std::size_t k, std::size_t j) const { return y[k * x.size() + j]; }
  // linear interpolation in x at time node k
  double interpolate(std::size_t k, double xv) const;
};

// Crank-Nicolson backward sweep with central differences (coefficients at mid-step times).
GridSolution solve_finite_horizon(const PdeProblem& problem, std::size_t nx, std::size_t nt);
// Two-point boundary value problem on the bounded domain.
GridSolution solve_exit_problem(const PdeProblem& problem, std::size_t nx);

struct ControlGrid {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> u;  // [time][x]

  double at(std::size_t k, std::size_t j) const { return u[k * x.size() + j]; }
};

// u* = sigma d/dx ln y: central differences inside, one-sided at the ends.
ControlGrid extract_control(const GridSolution& sol, const PdeProblem& problem);

// -(1/beta) ln y at t = 0 (or on the stationary grid).
std::vector<double> value_function(const GridSolution& sol, const PdeProblem& problem);

// Feedback policy that interpolates the control grid linearly in t and x (x clamped to the grid).
ControlPolicy interpolated_policy(const ControlGrid& control);

struct FeynmanKacOptions {
  double dt = 1e-3;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 0;
  double max_time = 50.0;  // exit problem: paths still inside are stopped here
  Execution exec{};
};

// E exp(-beta int phi - beta psi) over uncontrolled paths from (t, x), stopped at the first grid
// time outside the domain or at T.
Estimate feynman_kac_mc(const PdeProblem& problem, double t, double x, const FeynmanKacOptions& options);
// Time-homogeneous exit version from x.
Estimate feynman_kac_exit_mc(const PdeProblem& problem, double x, const FeynmanKacOptions& options);

// CSV (t, x, y, u_star, J_star) over every grid node.
void write_solution_csv(const GridSolution& sol, const ControlGrid& control, const PdeProblem& problem,
                        std::ostream& out);

}  // namespace entropic
