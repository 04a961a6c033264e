#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "entropic/parallel.hpp"
#include "entropic/path_engine.hpp"
#include "entropic/stats.hpp"

namespace entropic {

// Statistic of the path prefix on which the conditional law of the cost depends.
enum class SummaryKind {
  terminal_value,  // W_t
  value_and_max,   // (W_t, M_t)
};

/// Conditioning state at time t.
struct PathSummary {
  double t = 0.0;
  double w = 0.0;
  double m = 0.0;  // running max; ignored for terminal_value costs
};

/// End of one simulated continuation of a conditioned path.
struct Continuation {
  double w_terminal = 0.0;  // W_T
  double m_terminal = 0.0;  // max over [0, T], prefix included
  bool max_after_t = false; // the (first) argmax lies strictly after the conditioning time
};

/// Cost together with a pathwise oracle for its Malliavin derivative D_t C.
struct MalliavinCost {
  SummaryKind summary = SummaryKind::terminal_value;
  std::function<double(const Continuation&)> cost;
  std::function<double(const Continuation&)> derivative;

  static MalliavinCost quadratic_terminal(double target);  // D_t C = W_T - target
  static MalliavinCost running_maximum();                  // D_t M_T = 1{t <= argmax}
  static MalliavinCost constant(double k);                 // D_t C = 0
};

struct NestedOptions {
  std::uint64_t seed = 0;
  // bridge monitoring makes the continuation maximum exact for Brownian paths
  MaxMonitoring max_monitoring = MaxMonitoring::bridge;
  Execution exec{};
};

// -beta E[exp(-beta C) D_t C | summary] / E[exp(-beta C) | summary] from n_inner fresh
// continuations on the remaining grid, with common random numbers and a delta-method error.
Estimate malliavin_control(const MalliavinCost& cost, double beta, const PathSummary& state, const TimeGrid& grid,
                           std::size_t n_inner, const NestedOptions& options);

// ln E[exp(-beta C) | summary] (the unnormalized log conditional density).
Estimate conditional_log_weight(const MalliavinCost& cost, double beta, const PathSummary& state,
                                const TimeGrid& grid, std::size_t n_inner, const NestedOptions& options);

/// Known control and density process, for checking the residual against an oracle.
struct ClosedFormProcess {
  std::function<double(const PathSummary&)> control;
  std::function<double(const PathSummary&)> density;
};

struct ResidualEstimate {
  double residual = 0.0;
  double std_error = 0.0;
};

// sqrt(E[(Z_T - 1 - sum_k V_k Z_k dW_k)^2]) over n_paths outer Brownian paths, where V and Z
// are nested estimates (or the closed form when supplied).
ResidualEstimate clark_ocone_residual(const MalliavinCost& cost, double beta, const TimeGrid& grid,
                                      std::size_t n_paths, std::size_t n_inner, const NestedOptions& options,
                                      const std::optional<ClosedFormProcess>& closed_form = std::nullopt);

}  // namespace entropic
