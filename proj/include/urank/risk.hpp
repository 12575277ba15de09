#pragma once

#include <cstdint>
#include <optional>

#include "urank/model.hpp"

namespace urank {

/// L_n(r) as an exact count over ordered pairs i != j.
struct RiskReport {
  double l_n = 0.0;
  std::uint64_t ordered_pair_count = 0;
  std::uint64_t error_pair_count = 0;

  bool operator==(const RiskReport&) const = default;
};

/// One labelled point (x, y).
struct Observation {
  std::span<const double> x;
  double y = 0.0;
};

/// Error count 1[(y_i - y_j)·r(i, j) < 0] summed over ordered pairs i != j.
std::uint64_t count_errors(const PreparedRule& rule, std::span<const double> ys, unsigned threads = 1);

/// O(n²) reference evaluation of L_n(r).
RiskReport empirical_risk_naive(const LabeledSample& sample, const RankingRule& rule, unsigned threads = 1);

/// O(n log n) evaluation for scorer rules by label-inversion counting.
/// Returns nullopt when the sample has a score tie or a label tie; callers
/// then use the naive path. Throws ValidationError for table rules.
std::optional<RiskReport> empirical_risk_fast(const LabeledSample& sample, const RankingRule& rule);

/// Fast path where eligible, naive otherwise.
RiskReport empirical_risk(const LabeledSample& sample, const RankingRule& rule, unsigned threads = 1);

/// q_r(z, z') = 1[(y - y')·r(x, x') < 0] - 1[(y - y')·r*(x, x') < 0].
int excess_kernel_q(const RankingRule& rule, const RankingRule& bayes, Observation z, Observation zp);

/// Λ_n(r) = L_n(r) - L_n(r*), from integer counts.
double empirical_excess_risk(const LabeledSample& sample, const RankingRule& rule, const RankingRule& bayes,
                             unsigned threads = 1);

/// Λ(r) = L(r) - L(r*) by exact summation.
double true_excess(const RankingRule& rule, const RankingRule& bayes, const DiscreteDistribution& dist);

/// Λ(r) = E q_r by Monte Carlo over `budget` independent pairs.
McEstimate true_excess(const RankingRule& rule, const RankingRule& bayes, const GenerativeModel& model,
                       std::size_t budget, std::uint64_t seed);

}  // namespace urank
