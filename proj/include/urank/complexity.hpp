#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "urank/hoeffding.hpp"

namespace urank {

enum class Quantity { Z, U, M };

const char* to_string(Quantity q) noexcept;

/// Monte-Carlo mean of one Rademacher quantity over fresh sign vectors,
/// with the sample held fixed.
struct RademacherEstimate {
  Quantity quantity = Quantity::Z;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
};

struct ComplexityEstimates {
  RademacherEstimate z;
  RademacherEstimate u;
  RademacherEstimate m;
};

/// Right-hand side of the U-process moment inequality without its
/// universal constant, next to the observed sup_r |W_n(r)|.
struct BoundReport {
  ComplexityEstimates estimates;
  std::size_t n = 0;
  double delta = 0.1;
  double term_z = 0.0;    // E Z / n²
  double term_u = 0.0;    // E U · sqrt(log(1/δ)) / n²
  double term_m = 0.0;    // E M · log(1/δ) / n²
  double term_log = 0.0;  // log(1/δ) / n
  double rhs_shape = 0.0;
  double observed_sup_wn = 0.0;
};

/// n fair ±1 signs, a pure function of seed.
std::vector<int> draw_rademacher(std::size_t n, std::uint64_t seed);

/// sup_r |Σ_{i≠j} ε_i ε_j ĥ_r(i, j)|.
double z_chaos(std::span<const KernelTable> tables, std::span<const int> eps, bool include_diagonal = false);

/// sup_r sup_{|α|₂≤1} Σ_{i≠j} ε_i α_j ĥ_r(i, j) = sup_r ‖g(r)‖₂ with
/// g_j = Σ_{i≠j} ε_i ĥ_r(i, j).
double u_chaos(std::span<const KernelTable> tables, std::span<const int> eps, bool include_diagonal = false);

/// sup_{r, k} |Σ_{i≠k} ε_i ĥ_r(i, k)|.
double m_stat(std::span<const KernelTable> tables, std::span<const int> eps, bool include_diagonal = false);

/// The column sums g_j(r) for one table.
std::vector<double> column_sums(const KernelTable& table, std::span<const int> eps, bool include_diagonal = false);

/// One KernelTable per rule of the class.
std::vector<KernelTable> class_tables(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes,
                                      const Oracle& oracle, unsigned threads = 1);

double z_chaos(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes, const Oracle& oracle,
               std::span<const int> eps, bool include_diagonal = false);
double u_chaos(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes, const Oracle& oracle,
               std::span<const int> eps, bool include_diagonal = false);
double m_stat(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes, const Oracle& oracle,
              std::span<const int> eps, bool include_diagonal = false);

/// Replicate k draws its signs from seed + k.
ComplexityEstimates estimate_complexities(std::span<const KernelTable> tables, std::size_t reps, std::uint64_t seed,
                                          bool include_diagonal = false, unsigned threads = 1);

ComplexityEstimates estimate_complexities(const LabeledSample& sample, const RuleClass& rules,
                                          const RankingRule& bayes, const Oracle& oracle, std::size_t reps,
                                          std::uint64_t seed, bool include_diagonal = false, unsigned threads = 1);

/// sup over the tables of |W_n|.
double sup_abs_wn(std::span<const KernelTable> tables);

BoundReport bound_report(std::span<const KernelTable> tables, double delta, std::size_t reps, std::uint64_t seed,
                         bool include_diagonal = false, unsigned threads = 1);

BoundReport bound_report(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes,
                         const Oracle& oracle, double delta, std::size_t reps, std::uint64_t seed,
                         bool include_diagonal = false, unsigned threads = 1);

}  // namespace urank
