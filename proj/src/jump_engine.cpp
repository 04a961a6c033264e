#include "entropic/jump_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "entropic/csv.hpp"
#include "entropic/error.hpp"
#include "entropic/rng.hpp"
#include "entropic/special_math.hpp"
#include "entropic/stats.hpp"

namespace entropic {

JumpSizeMap JumpSizeMap::identity_map() { return JumpSizeMap{nullptr, true}; }

JumpSizeMap JumpSizeMap::custom(std::function<double(double)> fn) {
  if (!fn) throw DomainError("jump-size map is empty");
  return JumpSizeMap{std::move(fn), false};
}

void JumpProcessSpec::validate() const {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
  if (!gamma.identity && !gamma.fn) throw DomainError("jump-size map is empty");
  if (const auto* g = std::get_if<GammaIntensity>(&intensity)) {
    if (!(g->alpha > 0.0) || !(g->delta > 0.0)) throw DomainError("alpha and delta must be positive");
    if (tilt_exponent < 0.0) throw DomainError("tilt exponent must be >= 0");
  } else {
    const auto& a = std::get<AtomIntensity>(intensity);
    for (const auto& [z, w] : a.atoms) {
      if (!std::isfinite(z) || !(w >= 0.0) || !std::isfinite(w)) throw DomainError("atoms need finite z and w >= 0");
    }
  }
}

namespace {

// int g(z) nu(dz) for the gamma family: z = s^2 turns the density into 2 alpha exp(-delta s^2) ds.
double gamma_family_integral(const GammaIntensity& g, const std::function<double(double)>& h) {
  return integrate([&](double s) { return h(s * s) * 2.0 * g.alpha * std::exp(-g.delta * s * s); }, 0.0,
                   std::numeric_limits<double>::infinity());
}

// int h(z) nu(dz) for any spec.
double nu_integral(const JumpProcessSpec& spec, const std::function<double(double)>& h) {
  if (const auto* g = std::get_if<GammaIntensity>(&spec.intensity)) {
    if (spec.tilt_exponent == 0.0) return gamma_family_integral(*g, h);
    const double k = spec.tilt_exponent;
    return gamma_family_integral(*g, [&](double z) { return std::exp(-k * spec.gamma(z)) * h(z); });
  }
  double s = 0.0;
  for (const auto& [z, w] : std::get<AtomIntensity>(spec.intensity).atoms) s += w * h(z);
  return s;
}

}  // namespace

double total_mass(const JumpProcessSpec& spec) {
  spec.validate();
  if (const auto* g = std::get_if<GammaIntensity>(&spec.intensity); g && spec.tilt_exponent == 0.0)
    return g->alpha * std::sqrt(std::numbers::pi / g->delta);
  return nu_integral(spec, [](double) { return 1.0; });
}

JumpProcessSpec tilt(const JumpProcessSpec& spec) {
  spec.validate();
  JumpProcessSpec out = spec;
  if (spec.beta == 0.0) return out;
  if (auto* g = std::get_if<GammaIntensity>(&out.intensity)) {
    if (spec.gamma.identity)
      g->delta += spec.beta;
    else
      out.tilt_exponent += spec.beta;
  } else {
    for (auto& [z, w] : std::get<AtomIntensity>(out.intensity).atoms) w *= std::exp(-spec.beta * spec.gamma(z));
  }
  return out;
}

double jump_relative_entropy(const JumpProcessSpec& spec) {
  spec.validate();
  if (spec.beta == 0.0 || spec.horizon == 0.0) return 0.0;
  const double b = spec.beta;
  const double v = nu_integral(spec, [&](double z) {
    const double x = b * spec.gamma(z);
    // 1 - e^{-x}(1 + x), cancellation-free for small x
    return x < 1e-3 ? x * x * (0.5 + x * (-1.0 / 3.0 + x * (1.0 / 8.0 + x * (-1.0 / 30.0 + x / 144.0))))
                    : -std::expm1(-x) - x * std::exp(-x);
  });
  return std::max(0.0, spec.horizon * v);
}

double tilt_compensator(const JumpProcessSpec& spec) {
  spec.validate();
  if (spec.beta == 0.0) return 0.0;
  const double b = spec.beta;
  return nu_integral(spec, [&](double z) { return std::expm1(-b * spec.gamma(z)); });
}

double JumpPath::terminal_value() const noexcept {
  return pairwise_sum(sizes);
}

std::vector<JumpPath> sample_jump_paths(const JumpProcessSpec& spec, std::size_t n_paths, std::uint64_t seed,
                                        JumpMeasure measure, const Execution& exec) {
  spec.validate();
  std::vector<JumpPath> paths(n_paths);
  if (spec.horizon == 0.0) return paths;

  // proposals come from the gamma family without extra tilt, or from the atoms
  const auto* family = std::get_if<GammaIntensity>(&spec.intensity);
  std::vector<double> cumulative;
  std::vector<double> atom_z;
  double rate;
  if (family) {
    rate = family->alpha * std::sqrt(std::numbers::pi / family->delta);
  } else {
    double s = 0.0;
    for (const auto& [z, w] : std::get<AtomIntensity>(spec.intensity).atoms) {
      s += w;
      cumulative.push_back(s);
      atom_z.push_back(z);
    }
    rate = s;
  }
  if (rate == 0.0) return paths;
  const double thin_exponent = (measure == JumpMeasure::tilted ? spec.beta : 0.0) + spec.tilt_exponent;

  for_each_index(n_paths, exec, [&](std::size_t i) {
    PathStream stream(seed, i, StreamTag::jumps);
    JumpPath& path = paths[i];
    double t = 0.0;
    for (std::uint64_t j = 0;; ++j) {
      // fixed per-jump layout: uniforms 3j (arrival), 3j+1 (atom), 3j+2 (thinning); normal j (size)
      t += -std::log(stream.uniform(3 * j)) / rate;
      if (t > spec.horizon) break;
      double z;
      if (family) {
        const double n = stream.normal(j);
        z = n * n / (2.0 * family->delta);
      } else {
        const double target = stream.uniform(3 * j + 1) * rate;
        std::size_t k = 0;
        while (k + 1 < cumulative.size() && cumulative[k] <= target) ++k;
        z = atom_z[k];
      }
      const double size = spec.gamma(z);
      if (thin_exponent > 0.0 && stream.uniform(3 * j + 2) >= std::exp(-thin_exponent * size)) continue;
      path.times.push_back(t);
      path.sizes.push_back(size);
    }
  });
  return paths;
}

JumpDensityEvaluator::JumpDensityEvaluator(const JumpProcessSpec& spec)
    : beta_(spec.beta), compensator_term_(spec.horizon * tilt_compensator(spec)) {}

double JumpDensityEvaluator::log_density(const JumpPath& path) const {
  if (beta_ == 0.0) return 0.0;
  return -beta_ * path.terminal_value() - compensator_term_;
}

double sample_log_density(const JumpProcessSpec& spec, const JumpPath& path) {
  return JumpDensityEvaluator(spec).log_density(path);
}

void write_jump_paths_csv(std::span<const JumpPath> paths, double horizon, std::ostream& out) {
  CsvWriter csv(out, "entropic jump_paths", 1, {"path_id", "t", "X_t"});
  for (std::size_t i = 0; i < paths.size(); ++i) {
    double x = 0.0;
    csv.cell(i).cell(0.0).cell(x).end_row();
    for (std::size_t j = 0; j < paths[i].count(); ++j) {
      x += paths[i].sizes[j];
      csv.cell(i).cell(paths[i].times[j]).cell(x).end_row();
    }
    csv.cell(i).cell(horizon).cell(x).end_row();
  }
}

}  // namespace entropic
