#include "entropic/stats.hpp"

#include <cmath>
#include <vector>

namespace entropic {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 64;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate sample_mean(std::span<const double> values) {
  Estimate out;
  out.samples = values.size();
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.value = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - out.value;
      sq[i] = d * d;
    }
    out.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return out;
}

double combined_error(double se_a, double se_b) { return std::hypot(se_a, se_b); }

bool within_sigma(double a, double b, double combined_se, double k, double allowance) {
  return std::abs(a - b) <= k * combined_se + allowance;
}

}  // namespace entropic
