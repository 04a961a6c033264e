#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace entropic {

/// Probability vector over finitely many labeled outcomes.
class DiscreteMeasure {
 public:
  static constexpr double kSumTolerance = 1e-12;

  // Throws DomainError unless every weight is >= 0 and the total is 1 within kSumTolerance.
  explicit DiscreteMeasure(std::vector<double> weights);

  static DiscreteMeasure uniform(std::size_t n);
  // Symmetric Dirichlet(1) draw, i.e. uniform on the simplex.
  static DiscreteMeasure random_simplex(std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  std::vector<double> weights_;
};

/// Cost per outcome.
class CostVector {
 public:
  explicit CostVector(std::vector<double> values);
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// H(p; q) = sum p_i ln(p_i / q_i), with 0 ln 0 = 0; +infinity when p is not << q.
double relative_entropy(const DiscreteMeasure& p, const DiscreteMeasure& q);

// Minimizer of E^p c + H(p; q) / beta: weights proportional to q_i exp(-beta c_i).
DiscreteMeasure gibbs_measure(const CostVector& c, const DiscreteMeasure& q, double beta);

// E^p c + H(p; q) / beta (may be +infinity).
double entropy_weighted_cost(const DiscreteMeasure& p, const CostVector& c, const DiscreteMeasure& q,
                             double beta);

// -(1/beta) ln sum q_i exp(-beta c_i), log-sum-exp stabilized.
double optimal_value(const CostVector& c, const DiscreteMeasure& q, double beta);

// (H(p; p*) / beta, -(1/beta) ln E^q exp(-beta c)); the two parts sum to entropy_weighted_cost.
std::pair<double, double> variational_decomposition(const DiscreteMeasure& p, const CostVector& c,
                                                    const DiscreteMeasure& q, double beta);

}  // namespace entropic
