#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "urank/model.hpp"
#include "urank/risk.hpp"

namespace urank {

/// Expectations estimated from `budget` reference draws of the model.
struct McOracle {
  GenerativeModel model;
  std::size_t budget = 10000;
  std::uint64_t seed = 0;
};

/// Source of the population expectations behind h_r and ĥ_r. The discrete
/// backend sums over atoms exactly; the Monte-Carlo backend averages over a
/// fixed reference sample.
using Oracle = std::variant<DiscreteDistribution, McOracle>;

inline bool is_exact(const Oracle& oracle) noexcept {
  return std::holds_alternative<DiscreteDistribution>(oracle);
}

/// q̄_r(z, z') = (q_r(z, z') + q_r(z', z)) / 2, the symmetric working kernel.
double symmetric_kernel(const RankingRule& rule, const RankingRule& bayes, Observation z, Observation zp);

/// Λ(r) under the oracle (exact sum or Monte-Carlo mean of q̄).
double population_excess(const RankingRule& rule, const RankingRule& bayes, const Oracle& oracle);

/// h_r(z) = E q̄_r(z, Z') - Λ(r).
double h_projection(const RankingRule& rule, const RankingRule& bayes, Observation z, const Oracle& oracle);

/// ĥ_r(z, z') = q̄_r(z, z') - Λ(r) - h_r(z) - h_r(z').
double degenerate_kernel(const RankingRule& rule, const RankingRule& bayes, Observation z, Observation zp,
                         const Oracle& oracle);

/// Hoeffding decomposition of Λ_n(r) over one sample.
///
/// Holds the n×n matrix of ĥ_r(Z_i, Z_j) (the diagonal keeps ĥ_r(Z_i, Z_i)
/// for sensitivity checks but never enters W_n), the projections h_r(Z_i),
/// and the scalars Λ, Λ_n, T_n, W_n.
class KernelTable {
 public:
  KernelTable(std::size_t n, std::vector<double> hhat, std::vector<double> h, double lambda, double lambda_n,
              bool exact);

  /// Table with the given ĥ entries, zero projections and Λ = Λ_n = 0.
  static KernelTable from_matrix(std::size_t n, std::vector<double> hhat);

  std::size_t size() const noexcept { return n_; }
  bool has_matrix() const noexcept { return !hhat_.empty(); }
  double hhat(std::size_t i, std::size_t j) const noexcept { return hhat_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {hhat_.data() + i * n_, n_}; }
  std::span<const double> h() const noexcept { return h_; }

  double lambda() const noexcept { return lambda_; }
  double lambda_n() const noexcept { return lambda_n_; }
  double t_n() const noexcept { return t_n_; }
  double w_n() const noexcept { return w_n_; }
  /// Λ_n - Λ - 2T_n - W_n.
  double residual() const noexcept { return lambda_n_ - lambda_ - 2.0 * t_n_ - w_n_; }
  /// False on the Monte-Carlo backend, where the identity holds only up to
  /// the oracle's sampling error.
  bool exact() const noexcept { return exact_; }

  /// Drops the n×n matrix, keeping the scalars.
  void release_matrix() noexcept;

 private:
  std::size_t n_;
  std::vector<double> hhat_;
  std::vector<double> h_;
  double lambda_;
  double lambda_n_;
  double t_n_ = 0.0;
  double w_n_ = 0.0;
  bool exact_;
};

KernelTable decompose(const LabeledSample& sample, const RankingRule& rule, const RankingRule& bayes,
                      const Oracle& oracle, unsigned threads = 1);

/// ℓ(r, z) = 2 E 1[(y - Y)·r(x, X) < 0] - L(r).
double pointwise_loss_l(const RankingRule& rule, Observation z, const Oracle& oracle);

/// ν_n(r) = (1/n) Σ ℓ(r, Z_i) - L(r).
double empirical_process_nu(const LabeledSample& sample, const RankingRule& rule, const Oracle& oracle);

/// L(r) under the oracle.
double oracle_risk(const RankingRule& rule, const Oracle& oracle);

}  // namespace urank
