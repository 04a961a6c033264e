#include "entropic/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "entropic/error.hpp"
#include "entropic/rng.hpp"

namespace entropic {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionError("measure/cost length mismatch");
}

void require_positive_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive and finite");
}

// min over the support of q of beta * c_i; the shift for every log-sum-exp below
double support_shift(const CostVector& c, const DiscreteMeasure& q, double beta) {
  double shift = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) shift = std::min(shift, beta * c[i]);
  }
  return shift;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw DimensionError("empty measure");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("measure weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > kSumTolerance) throw DomainError("measure weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t n) {
  if (n == 0) throw DimensionError("empty measure");
  return DiscreteMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteMeasure DiscreteMeasure::random_simplex(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  if (n == 0) throw DimensionError("empty measure");
  PathStream rng(seed, stream, StreamTag::instance);
  std::vector<double> w(n);
  for (auto& x : w) x = -std::log(rng.next_uniform());  // Exp(1) spacings
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  // renormalize once more so the rounding residue stays far inside the tolerance
  const double again = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= again;
  return DiscreteMeasure(std::move(w));
}

CostVector::CostVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DimensionError("empty cost vector");
  for (double v : values_) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
      throw DomainError("costs must be bounded below");
  }
}

double relative_entropy(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  require_same_length(p.size(), q.size());
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    h += p[i] * std::log(p[i] / q[i]);
  }
  // rounding can push an exact zero slightly negative
  return std::max(h, 0.0);
}

DiscreteMeasure gibbs_measure(const CostVector& c, const DiscreteMeasure& q, double beta) {
  require_same_length(c.size(), q.size());
  require_positive_beta(beta);
  const double shift = support_shift(c, q, beta);
  if (!std::isfinite(shift)) throw NumericError("gibbs normalization underflow: q charges only infinite costs");
  std::vector<double> w(q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    w[i] = q[i] > 0.0 ? q[i] * std::exp(-(beta * c[i] - shift)) : 0.0;
    total += w[i];
  }
  if (!(total > 0.0)) throw NumericError("gibbs normalization underflow");
  for (auto& x : w) x /= total;
  return DiscreteMeasure(std::move(w));
}

double entropy_weighted_cost(const DiscreteMeasure& p, const CostVector& c, const DiscreteMeasure& q,
                             double beta) {
  require_same_length(p.size(), c.size());
  require_positive_beta(beta);
  const double h = relative_entropy(p, q);
  if (!std::isfinite(h)) return h;
  double expected = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) expected += p[i] * c[i];
  }
  return expected + h / beta;
}

double optimal_value(const CostVector& c, const DiscreteMeasure& q, double beta) {
  require_same_length(c.size(), q.size());
  require_positive_beta(beta);
  const double shift = support_shift(c, q, beta);
  if (!std::isfinite(shift)) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) s += q[i] * std::exp(-(beta * c[i] - shift));
  }
  return (shift - std::log(s)) / beta;
}

std::pair<double, double> variational_decomposition(const DiscreteMeasure& p, const CostVector& c,
                                                    const DiscreteMeasure& q, double beta) {
  const DiscreteMeasure optimum = gibbs_measure(c, q, beta);
  return {relative_entropy(p, optimum) / beta, optimal_value(c, q, beta)};
}

}  // namespace entropic
