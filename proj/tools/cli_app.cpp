#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entropic/csv.hpp"
#include "entropic/error.hpp"
#include "entropic/jump_engine.hpp"
#include "entropic/malliavin.hpp"
#include "entropic/measure.hpp"
#include "entropic/path_engine.hpp"
#include "entropic/pde_solver.hpp"
#include "entropic/policies.hpp"
#include "entropic/rng.hpp"

namespace entropic::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Config {
  double beta = 1.0;
  double horizon = 1.0;
  std::size_t steps = 1000;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string format = "csv";
  int threads = 0;

  // bridge / pde / malliavin
  double x0 = 1.0;
  double target = 0.0;
  double perturbation = 0.5;
  // gibbs
  std::size_t outcomes = 8;
  // jumps
  double alpha = 10.0;
  double delta = 5.0;
  std::vector<double> betas{0.0, 1.0, 2.0};
  std::size_t plot_paths = 5;
  // pde
  std::size_t nx = 200;
  std::size_t nt = 200;
  std::vector<double> domain{-1.0, 1.0};

  Execution exec() const { return threads > 0 ? Execution::with_threads(threads) : Execution{}; }
};

struct Check {
  std::string name;
  double estimate;
  double std_error;
  double oracle;
  double tolerance;
  bool pass;
};

// Sigma checks always get this floor so that exact zero-variance cases compare cleanly.
constexpr double kRoundoff = 1e-12;

class Report {
 public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  json& config() { return config_; }

  void add(std::string name, double estimate, double std_error, double oracle, double tolerance, bool pass) {
    checks_.push_back({std::move(name), estimate, std_error, oracle, tolerance, pass});
  }

  // |estimate - oracle| <= k * hypot(se, oracle_se) + allowance
  void sigma(std::string name, const Estimate& e, double oracle, double oracle_se = 0.0, double allowance = 0.0,
             double k = 3.0) {
    const double se = combined_error(e.std_error, oracle_se);
    const double tol = k * se + allowance + kRoundoff;
    add(std::move(name), e.value, se, oracle, tol, std::abs(e.value - oracle) <= tol);
  }

  void artifact(const fs::path& p) { artifacts_.push_back(p.filename().string()); }

  bool passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
  }

  void write_json(std::ostream& out) const {
    json j;
    j["schema"] = "entropic report v1";
    j["command"] = command_;
    j["config"] = config_;
    json checks = json::array();
    for (const auto& c : checks_) {
      checks.push_back({{"name", c.name},
                        {"estimate", c.estimate},
                        {"std_error", c.std_error},
                        {"oracle", c.oracle},
                        {"tolerance", c.tolerance},
                        {"pass", c.pass}});
    }
    j["checks"] = checks;
    j["artifacts"] = artifacts_;
    j["pass"] = passed();
    out << j.dump(2) << '\n';
  }

  void write_csv(std::ostream& out) const {
    CsvWriter csv(out, "entropic report", 1, {"check", "estimate", "std_error", "oracle", "tolerance", "pass"});
    for (const auto& c : checks_) {
      csv.cell(c.name).cell(c.estimate).cell(c.std_error).cell(c.oracle).cell(c.tolerance);
      csv.cell(std::string_view(c.pass ? "true" : "false"));
      csv.end_row();
    }
  }

 private:
  std::string command_;
  json config_ = json::object();
  std::vector<Check> checks_;
  std::vector<std::string> artifacts_;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_artifact(const Config& cfg, Report& report, const std::string& name) {
  const fs::path p = fs::path(cfg.out) / name;
  std::ofstream f(p);
  if (!f) throw UsageError("cannot write " + p.string());
  report.artifact(p);
  return f;
}

std::string number_label(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

json common_echo(const Config& c) {
  return {{"beta", c.beta}, {"horizon", c.horizon}, {"steps", c.steps}, {"paths", c.paths},
          {"seed", c.seed}, {"out", c.out},         {"format", c.format}};
}

SimulationOptions sim_options(const Config& cfg, std::uint64_t seed) {
  SimulationOptions o;
  o.seed = seed;
  o.exec = cfg.exec();
  return o;
}

// ---------------------------------------------------------------------------

void run_gibbs(const Config& cfg, Report& report) {
  report.config() = common_echo(cfg);
  report.config()["outcomes"] = cfg.outcomes;
  const std::size_t n = cfg.outcomes;

  PathStream costs_stream(cfg.seed, 0, StreamTag::instance);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = 5.0 * costs_stream.uniform(i);
  const CostVector cost(c);
  const auto q = DiscreteMeasure::random_simplex(n, cfg.seed, 1);
  const auto p_star = gibbs_measure(cost, q, cfg.beta);
  const double j_star = entropy_weighted_cost(p_star, cost, q, cfg.beta);
  const double value = optimal_value(cost, q, cfg.beta);

  std::vector<double> j(cfg.paths), residual(cfg.paths);
  for_each_index(cfg.paths, cfg.exec(), [&](std::size_t r) {
    const auto p = DiscreteMeasure::random_simplex(n, cfg.seed, 2 + r);
    j[r] = entropy_weighted_cost(p, cost, q, cfg.beta);
    const auto [a, b] = variational_decomposition(p, cost, q, cfg.beta);
    residual[r] = std::abs(a + b - j[r]);
  });
  const double max_residual = cfg.paths ? *std::max_element(residual.begin(), residual.end()) : 0.0;
  const double min_j = cfg.paths ? *std::min_element(j.begin(), j.end()) : j_star;

  report.add("decomposition_residual", max_residual, 0.0, 0.0, 1e-12, max_residual < 1e-12);
  report.add("gibbs_value_matches_optimal_value", j_star, 0.0, value, 1e-12, std::abs(j_star - value) < 1e-12);
  report.add("gibbs_below_sweep_minimum", j_star, 0.0, min_j, 0.0, j_star <= min_j);

  {
    auto f = open_artifact(cfg, report, "gibbs_instance.csv");
    CsvWriter csv(f, "entropic gibbs_instance", 1, {"outcome", "q", "c", "p_star"});
    for (std::size_t i = 0; i < n; ++i) csv.cell(i).cell(q[i]).cell(c[i]).cell(p_star[i]).end_row();
  }
  {
    auto f = open_artifact(cfg, report, "gibbs_sweep.csv");
    CsvWriter csv(f, "entropic gibbs_sweep", 1, {"sample", "J", "decomposition_residual"});
    for (std::size_t r = 0; r < cfg.paths; ++r) csv.cell(r).cell(j[r]).cell(residual[r]).end_row();
  }
}

// ---------------------------------------------------------------------------

std::size_t steps_until(const Config& cfg, double t) {
  const auto k = static_cast<std::size_t>(std::llround(t / cfg.horizon * static_cast<double>(cfg.steps)));
  return std::max<std::size_t>(k, 1);
}

void run_bridge(const Config& cfg, Report& report) {
  report.config() = common_echo(cfg);
  report.config()["x0"] = cfg.x0;
  report.config()["target"] = cfg.target;
  report.config()["perturbation"] = cfg.perturbation;

  BridgeSpec spec;
  spec.beta = cfg.beta;
  spec.horizon = cfg.horizon;
  spec.target = cfg.target;
  spec.start = cfg.x0;
  const TimeGrid grid(cfg.horizon, cfg.steps);
  const auto coeffs = SdeCoefficients::brownian();
  const auto cost = CostFunctional::quadratic_terminal(cfg.target);
  const auto policy = bridge_policy(spec);
  const std::vector<double> x0{cfg.x0};

  const Estimate controlled = estimate_cost(coeffs, policy, cost, grid, cfg.paths, cfg.beta, x0, sim_options(cfg, cfg.seed));
  const Estimate sampled_value =
      optimal_value_mc(cost, coeffs, grid, cfg.paths, cfg.beta, x0, sim_options(cfg, mix_seed(cfg.seed, 1)));
  const double closed = bridge_optimal_value(spec);
  report.sigma("controlled_cost_vs_closed_form", controlled, closed);
  report.sigma("optimal_value_mc_vs_closed_form", sampled_value, closed);
  report.sigma("controlled_cost_vs_optimal_value_mc", controlled, sampled_value.value, sampled_value.std_error);

  // same noise as the optimal run, so the comparison is paired
  const Estimate perturbed = estimate_cost(coeffs, shifted(policy, cfg.perturbation), cost, grid, cfg.paths,
                                           cfg.beta, x0, sim_options(cfg, cfg.seed));
  const double gap_se = combined_error(perturbed.std_error, controlled.std_error);
  report.add("perturbed_control_is_worse", perturbed.value - controlled.value, gap_se, 0.0, 3.0 * gap_se,
             perturbed.value - controlled.value > 3.0 * gap_se);

  for (double frac : {0.25, 0.5, 1.0}) {
    const double t = frac * cfg.horizon;
    PathProblem p;
    p.grid = TimeGrid(t, steps_until(cfg, t));
    p.x0 = x0;
    p.measure = SamplingMeasure::reference;
    const Estimate m = outcome_mean(p, cfg.paths, sim_options(cfg, mix_seed(cfg.seed, 2)),
                                    [&](const PathOutcome& o) { return bridge_density(spec, t, o.terminal); });
    report.sigma("density_martingale_t=" + number_label(t), m, 1.0);
  }

  auto bundle = sample_paths(grid, std::min<std::size_t>(cfg.paths, 8), 1, sim_options(cfg, cfg.seed));
  bundle = integrate_controlled(coeffs, policy, bundle, x0);
  auto f = open_artifact(cfg, report, "bridge_paths.csv");
  write_bundle_csv(bundle, f);
}

// ---------------------------------------------------------------------------

void run_maxbm(const Config& cfg, Report& report) {
  report.config() = common_echo(cfg);
  MaxBmSpec spec{cfg.beta, cfg.horizon};
  const TimeGrid grid(cfg.horizon, cfg.steps);
  const auto coeffs = SdeCoefficients::brownian();
  const std::vector<double> x0{0.0};
  const auto policy = max_bm_policy(spec);
  const double j_star = -std::log(max_bm_normalizer(spec)) / cfg.beta;

  const Estimate controlled = estimate_cost(coeffs, policy, CostFunctional::running_maximum(), grid, cfg.paths,
                                            cfg.beta, x0, sim_options(cfg, cfg.seed));
  report.sigma("controlled_cost_vs_optimal_value", controlled, j_star, 0.0, 10.0 * std::sqrt(grid.dt()));

  SimulationOptions bridge_opts = sim_options(cfg, mix_seed(cfg.seed, 1));
  bridge_opts.max_monitoring = MaxMonitoring::bridge;
  for (double frac : {0.25, 0.5, 1.0}) {
    const double t = frac * cfg.horizon;
    PathProblem p;
    p.grid = TimeGrid(t, steps_until(cfg, t));
    p.x0 = x0;
    p.measure = SamplingMeasure::reference;
    const Estimate m = outcome_mean(p, cfg.paths, bridge_opts, [&](const PathOutcome& o) {
      return max_bm_density(spec, t, o.terminal, o.running_max);
    });
    report.sigma("density_martingale_t=" + number_label(t), m, 1.0);
  }

  std::vector<double> times, m_values{0.0, 0.25, 0.5, 1.0, 2.0}, gaps{0.0, 0.05, 0.25, 0.5, 1.0, 2.0, 4.0};
  for (double frac : {0.0, 0.25, 0.5, 0.75, 0.9, 0.99}) times.push_back(frac * cfg.horizon);
  double u_min = 0.0, u_max = -cfg.beta;
  for (double t : times) {
    for (double m : m_values) {
      for (double g : gaps) {
        const double u = max_bm_control(spec, t, m - g, m);
        u_min = std::min(u_min, u);
        u_max = std::max(u_max, u);
      }
    }
  }
  report.add("control_lower_bound", u_min, 0.0, -cfg.beta, 0.0, u_min >= -cfg.beta);
  report.add("control_upper_bound", u_max, 0.0, 0.0, 0.0, u_max <= 0.0);
  {
    auto f = open_artifact(cfg, report, "maxbm_surface.csv");
    write_max_bm_surface_csv(spec, times, m_values, gaps, f);
  }

  // one path, uncontrolled and controlled with the same noise
  const auto raw = sample_paths(grid, 1, 1, sim_options(cfg, cfg.seed));
  const auto free_path = integrate_controlled(coeffs, ControlPolicy::zero(), raw, x0);
  const auto ctl_path = integrate_controlled(coeffs, policy, raw, x0);
  auto f = open_artifact(cfg, report, "maxbm_paths.csv");
  CsvWriter csv(f, "entropic maxbm_paths", 1, {"t", "w", "m", "w_controlled", "m_controlled"});
  for (std::size_t k = 0; k <= grid.steps(); ++k) {
    csv.cell(grid.time(k)).cell(free_path.state(0, k)[0]).cell(free_path.max_at(0, k));
    csv.cell(ctl_path.state(0, k)[0]).cell(ctl_path.max_at(0, k)).end_row();
  }
  auto g = open_artifact(cfg, report, "maxbm_control.csv");
  CsvWriter ucsv(g, "entropic maxbm_control", 1, {"t", "u"});
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    ucsv.cell(t).cell(max_bm_control(spec, t, ctl_path.state(0, k)[0], ctl_path.max_at(0, k))).end_row();
  }
}

// ---------------------------------------------------------------------------

void run_jumps(const Config& cfg, Report& report) {
  report.config() = common_echo(cfg);
  report.config()["alpha"] = cfg.alpha;
  report.config()["delta"] = cfg.delta;
  report.config()["betas"] = cfg.betas;

  JumpProcessSpec base;
  base.intensity = GammaIntensity{cfg.alpha, cfg.delta};
  base.horizon = cfg.horizon;
  const auto original = sample_jump_paths(base, cfg.paths, cfg.seed, JumpMeasure::original, cfg.exec());

  for (double b : cfg.betas) {
    JumpProcessSpec spec = base;
    spec.beta = b;
    const std::string label = "beta=" + number_label(b);
    const auto tilted = sample_jump_paths(spec, cfg.paths, cfg.seed, JumpMeasure::tilted, cfg.exec());
    const JumpDensityEvaluator density(spec);

    std::vector<double> counts(cfg.paths), log_z(cfg.paths), z_q(cfg.paths);
    for (std::size_t i = 0; i < cfg.paths; ++i) {
      counts[i] = static_cast<double>(tilted[i].count());
      log_z[i] = density.log_density(tilted[i]);
      z_q[i] = std::exp(density.log_density(original[i]));
    }
    report.sigma("mean_jump_count_" + label, sample_mean(counts), total_mass(tilt(spec)) * cfg.horizon);
    report.sigma("relative_entropy_" + label, sample_mean(log_z), jump_relative_entropy(spec));
    report.sigma("density_normalization_" + label, sample_mean(z_q), 1.0);

    auto f = open_artifact(cfg, report, "jumps_beta_" + number_label(b) + ".csv");
    const std::size_t shown = std::min(cfg.plot_paths, tilted.size());
    write_jump_paths_csv(std::span<const JumpPath>(tilted.data(), shown), cfg.horizon, f);
  }
}

// ---------------------------------------------------------------------------

void run_pde(const Config& cfg, Report& report) {
  report.config() = common_echo(cfg);
  report.config()["nx"] = cfg.nx;
  report.config()["nt"] = cfg.nt;
  report.config()["domain"] = cfg.domain;
  report.config()["x0"] = cfg.x0;

  // finite horizon, quadratic terminal cost
  const PdeProblem quad = quadratic_terminal_problem(cfg.beta, cfg.horizon, cfg.target);
  const GridSolution sol = solve_finite_horizon(quad, cfg.nx, cfg.nt);
  const ControlGrid control = extract_control(sol, quad);
  BridgeSpec bridge;
  bridge.beta = cfg.beta;
  bridge.horizon = cfg.horizon;
  bridge.target = cfg.target;
  const double band = 3.0 * std::sqrt(cfg.horizon);
  const double h = sol.x[1] - sol.x[0];
  double y_err = 0.0, u_err = 0.0;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    const double t = sol.times[k];
    for (std::size_t j = 0; j < sol.x.size(); ++j) {
      const double x = sol.x[j];
      if (std::abs(x - cfg.target) > band) continue;
      const double rho = bridge.rho(t);
      const double exact = std::exp(-0.5 * cfg.beta * (x - cfg.target) * (x - cfg.target) / rho) / std::sqrt(rho);
      y_err = std::max(y_err, std::abs(sol.at(k, j) - exact));
      if (k + 1 < sol.times.size()) u_err = std::max(u_err, std::abs(control.at(k, j) - bridge_control(bridge, t, x)));
    }
  }
  const double y_tol = 0.5 * h * h;
  report.add("finite_horizon_interior_error", y_err, 0.0, 0.0, y_tol, y_err <= y_tol);
  const double u_tol = std::max(1e-3, h * h);
  report.add("extracted_control_error", u_err, 0.0, 0.0, u_tol, u_err <= u_tol);

  FeynmanKacOptions fk;
  fk.dt = cfg.horizon / static_cast<double>(cfg.steps);
  fk.n_paths = cfg.paths;
  fk.seed = cfg.seed;
  fk.exec = cfg.exec();
  const Estimate fk_quad = feynman_kac_mc(quad, 0.0, cfg.x0, fk);
  report.sigma("feynman_kac_vs_pde_x0", fk_quad, sol.interpolate(0, cfg.x0), 0.0, h * h);

  // closure: the extracted control run through the path engine
  const double j_pde = -std::log(sol.interpolate(0, cfg.x0)) / cfg.beta;
  const Estimate closure =
      estimate_cost(SdeCoefficients::brownian(), interpolated_policy(control), CostFunctional::quadratic_terminal(cfg.target),
                    TimeGrid(cfg.horizon, cfg.steps), cfg.paths, cfg.beta, std::vector<double>{cfg.x0},
                    sim_options(cfg, mix_seed(cfg.seed, 1)));
  report.sigma("closure_cost_vs_value_function", closure, j_pde, 0.0, 2e-3);

  // exit problem: sigma = sqrt 2, phi = 1, psi = 0, so y'' = beta y
  if (cfg.domain.size() != 2 || !(cfg.domain[0] < cfg.domain[1])) throw UsageError("--domain needs lo,hi with lo < hi");
  const Interval d{cfg.domain[0], cfg.domain[1]};
  const PdeProblem exit = constant_exit_problem(cfg.beta, 0.0, std::sqrt(2.0), 1.0, 0.0, d);
  const GridSolution esol = solve_exit_problem(exit, cfg.nx);
  const double mid = 0.5 * (d.lo + d.hi);
  const double half = 0.5 * (d.hi - d.lo);
  const double k = std::sqrt(cfg.beta);
  double e_err = 0.0;
  for (std::size_t j = 0; j < esol.x.size(); ++j)
    e_err = std::max(e_err, std::abs(esol.at(0, j) - std::cosh(k * (esol.x[j] - mid)) / std::cosh(k * half)));
  const double eh = esol.x[1] - esol.x[0];
  report.add("exit_problem_error", e_err, 0.0, 0.0, eh * eh, e_err <= eh * eh);
  report.add("exit_value_at_midpoint", esol.interpolate(0, mid), 0.0, 1.0 / std::cosh(k * half), eh * eh,
             std::abs(esol.interpolate(0, mid) - 1.0 / std::cosh(k * half)) <= eh * eh);
  const Estimate fk_exit = feynman_kac_exit_mc(exit, mid, fk);
  report.sigma("exit_feynman_kac_vs_pde", fk_exit, esol.interpolate(0, mid), 0.0, std::sqrt(fk.dt));

  {
    auto f = open_artifact(cfg, report, "pde_finite_horizon.csv");
    write_solution_csv(sol, control, quad, f);
  }
  auto f = open_artifact(cfg, report, "pde_exit.csv");
  write_solution_csv(esol, extract_control(esol, exit), exit, f);
}

// ---------------------------------------------------------------------------

void run_malliavin(const Config& cfg, Report& report) {
  report.config() = common_echo(cfg);
  const TimeGrid grid(cfg.horizon, cfg.steps);
  NestedOptions opts;
  opts.exec = cfg.exec();
  const double T = cfg.horizon;

  BridgeSpec bridge;
  bridge.beta = cfg.beta;
  bridge.horizon = T;
  const MaxBmSpec maxbm{cfg.beta, T};

  struct Point {
    std::string cost;
    PathSummary state;
  };
  std::vector<Point> points;
  for (auto [t, w] : {std::pair{0.0, 1.0}, {0.25, 0.5}, {0.5, -0.3}, {0.75, 1.2}, {0.9, -1.0}})
    points.push_back({"quadratic", {t * T, w, w}});
  for (auto [t, w, m] : {std::tuple{0.5, 0.0, 0.3}, {0.2, 0.1, 0.3}, {0.25, -0.2, 0.1}, {0.6, 0.3, 0.4},
                         {0.8, -0.5, 0.5}})
    points.push_back({"running_maximum", {t * T, w, m}});

  auto f = open_artifact(cfg, report, "malliavin_estimates.csv");
  CsvWriter csv(f, "entropic malliavin_estimates", 1, {"cost", "t", "w", "m", "estimate", "std_error", "oracle"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const bool quadratic = p.cost == "quadratic";
    const auto mc = quadratic ? MalliavinCost::quadratic_terminal(0.0) : MalliavinCost::running_maximum();
    opts.seed = mix_seed(cfg.seed, i);
    const Estimate e = malliavin_control(mc, cfg.beta, p.state, grid, cfg.paths, opts);
    const double oracle = quadratic ? bridge_control(bridge, p.state.t, p.state.w)
                                    : max_bm_control(maxbm, p.state.t, p.state.w, p.state.m);
    report.sigma(p.cost + "_t=" + number_label(p.state.t) + "_w=" + number_label(p.state.w) +
                     (quadratic ? "" : "_m=" + number_label(p.state.m)),
                 e, oracle);
    csv.cell(p.cost).cell(p.state.t).cell(p.state.w).cell(p.state.m).cell(e.value).cell(e.std_error).cell(oracle);
    csv.end_row();
  }
}

// ---------------------------------------------------------------------------

struct Subcommand {
  const char* name;
  const char* help;
  Config defaults;
  std::function<void(const Config&, Report&)> run;
};

std::vector<Subcommand> subcommands() {
  Config gibbs;
  gibbs.paths = 10000;
  gibbs.seed = 1;
  Config bridge;
  bridge.seed = 7;
  Config maxbm;
  maxbm.seed = 11;
  Config jumps;
  jumps.seed = 1;
  Config pde;
  pde.paths = 20000;
  pde.seed = 5;
  pde.x0 = 0.5;
  Config malliavin;
  malliavin.paths = 10000;
  malliavin.steps = 50;
  malliavin.seed = 13;
  return {
      {"gibbs", "Discrete Gibbs optimality on a random instance", gibbs, run_gibbs},
      {"bridge", "Quadratic terminal cost: controlled cost, sampled value and closed form", bridge, run_bridge},
      {"maxbm", "Running-maximum cost: density process, cost and control surface", maxbm, run_maxbm},
      {"jumps", "Tilted Poisson random measure: counts, entropy and density", jumps, run_jumps},
      {"pde", "Linearized HJB solver against closed forms and Feynman-Kac", pde, run_pde},
      {"malliavin", "Nested Monte Carlo control against closed-form policies", malliavin, run_malliavin},
  };
}

void add_options(CLI::App& sub, const std::string& name, Config& c) {
  sub.add_option("--beta", c.beta, "Entropy weight beta > 0")->check(CLI::PositiveNumber)->capture_default_str();
  sub.add_option("--horizon", c.horizon, "Time horizon T")->check(CLI::PositiveNumber)->capture_default_str();
  sub.add_option("--steps", c.steps, "Time steps")->check(CLI::PositiveNumber)->capture_default_str();
  sub.add_option("--paths", c.paths, "Monte Carlo paths (inner replicas for malliavin, sweep size for gibbs)")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  sub.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub.add_option("--out", c.out, "Output directory")->capture_default_str();
  sub.add_option("--format", c.format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub.add_option("--threads", c.threads, "Worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  if (name == "gibbs") {
    sub.add_option("--outcomes", c.outcomes, "Number of outcomes")->check(CLI::Range(1, 4096))->capture_default_str();
  }
  if (name == "bridge" || name == "pde") {
    sub.add_option("--x0", c.x0, "Initial state")->capture_default_str();
    sub.add_option("--target", c.target, "Target x*")->capture_default_str();
  }
  if (name == "bridge") {
    sub.add_option("--perturbation", c.perturbation, "Constant added to the optimal control")->capture_default_str();
  }
  if (name == "jumps") {
    sub.add_option("--alpha", c.alpha, "Intensity scale alpha")->check(CLI::PositiveNumber)->capture_default_str();
    sub.add_option("--delta", c.delta, "Intensity decay delta")->check(CLI::PositiveNumber)->capture_default_str();
    sub.add_option("--betas", c.betas, "Comma-separated beta values")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
    sub.add_option("--plot-paths", c.plot_paths, "Paths written per beta")->capture_default_str();
  }
  if (name == "pde") {
    sub.add_option("--nx", c.nx, "Space intervals")->check(CLI::Range(8, 1 << 20))->capture_default_str();
    sub.add_option("--nt", c.nt, "Time steps of the PDE sweep")->check(CLI::Range(8, 1 << 20))->capture_default_str();
    sub.add_option("--domain", c.domain, "Exit domain lo,hi")->delimiter(',')->expected(1, 2);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relative-entropy-weighted optimal control experiments", "entropic"};
  app.require_subcommand(1);
  auto commands = subcommands();
  std::vector<Config> configs;
  configs.reserve(commands.size());
  std::vector<CLI::App*> subs;
  for (auto& c : commands) {
    configs.push_back(c.defaults);
    auto* sub = app.add_subcommand(c.name, c.help);
    add_options(*sub, c.name, configs.back());
    subs.push_back(sub);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_pass;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return exit_pass;
    }
    err << "usage error: " << e.what() << '\n';
    return exit_usage_error;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    const Config& cfg = configs[i];
    Report report(commands[i].name);
    try {
      fs::create_directories(cfg.out);
      commands[i].run(cfg, report);
    } catch (const UsageError& e) {
      err << "usage error: " << e.what() << '\n';
      return exit_usage_error;
    } catch (const DomainError& e) {
      err << "usage error: " << e.what() << '\n';
      return exit_usage_error;
    } catch (const DimensionError& e) {
      err << "usage error: " << e.what() << '\n';
      return exit_usage_error;
    } catch (const std::exception& e) {
      err << "failure: " << e.what() << '\n';
      return exit_acceptance_failure;
    }

    const fs::path report_path = fs::path(cfg.out) / (std::string(commands[i].name) + "_report." + cfg.format);
    std::ofstream file(report_path);
    if (cfg.format == "json") {
      report.write_json(out);
      report.write_json(file);
    } else {
      report.write_csv(out);
      report.write_csv(file);
    }
    return report.passed() ? exit_pass : exit_acceptance_failure;
  }
  return exit_usage_error;
}

}  // namespace entropic::cli
