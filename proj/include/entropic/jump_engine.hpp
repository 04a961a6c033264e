#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "entropic/parallel.hpp"

namespace entropic {

/// nu(dz) = alpha z^{-1/2} exp(-delta z) dz on (0, inf).
struct GammaIntensity {
  double alpha = 10.0;
  double delta = 5.0;
};

/// nu = sum_i w_i delta_{z_i}.
struct AtomIntensity {
  std::vector<std::pair<double, double>> atoms;  // (z_i, w_i)
};

using Intensity = std::variant<GammaIntensity, AtomIntensity>;

/// Jump-size map gamma(z).
struct JumpSizeMap {
  std::function<double(double)> fn;
  bool identity = true;

  static JumpSizeMap identity_map();
  static JumpSizeMap custom(std::function<double(double)> fn);

  double operator()(double z) const { return identity ? z : fn(z); }
};

struct JumpProcessSpec {
  Intensity intensity = GammaIntensity{};
  JumpSizeMap gamma = JumpSizeMap::identity_map();
  double horizon = 1.0;
  double beta = 0.0;
  // extra factor exp(-tilt_exponent gamma(z)) on a gamma-family intensity whose size map is
  // not the identity (otherwise tilts are folded into delta)
  double tilt_exponent = 0.0;

  void validate() const;
};

double total_mass(const JumpProcessSpec& spec);

// Same process with intensity exp(-beta gamma(z)) nu(dz).
JumpProcessSpec tilt(const JumpProcessSpec& spec);

// T int [1 - exp(-beta gamma) (1 + beta gamma)] nu(dz).
double jump_relative_entropy(const JumpProcessSpec& spec);

// int (exp(-beta gamma(z)) - 1) nu(dz).
double tilt_compensator(const JumpProcessSpec& spec);

struct JumpPath {
  std::vector<double> times;  // sorted, in [0, T]
  std::vector<double> sizes;  // gamma(z)

  std::size_t count() const noexcept { return times.size(); }
  double terminal_value() const noexcept;  // X_T
};

enum class JumpMeasure {
  original,  // intensity nu
  tilted,    // intensity exp(-beta gamma) nu, by thinning the original draws
};

// Per path: jumps of the nu-process from stream (seed, path), each kept under the tilted
// measure iff its own uniform is below exp(-beta gamma(z)). Paths for different beta therefore
// share their randomness and the tilted jump sets are nested.
std::vector<JumpPath> sample_jump_paths(const JumpProcessSpec& spec, std::size_t n_paths, std::uint64_t seed,
                                        JumpMeasure measure = JumpMeasure::original, const Execution& exec = {});

/// ln Z*_T for single paths, with the compensator computed once.
class JumpDensityEvaluator {
 public:
  explicit JumpDensityEvaluator(const JumpProcessSpec& spec);

  double log_density(const JumpPath& path) const;

 private:
  double beta_;
  double compensator_term_;  // T int (exp(-beta gamma) - 1) nu(dz)
};

// -beta sum gamma(z) - T int (exp(-beta gamma) - 1) nu(dz).
double sample_log_density(const JumpProcessSpec& spec, const JumpPath& path);

// Step functions (path_id, t, X_t): a row at 0, one per jump and one at T.
void write_jump_paths_csv(std::span<const JumpPath> paths, double horizon, std::ostream& out);

}  // namespace entropic
