#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "urank/complexity.hpp"
#include "urank/erm.hpp"
#include "urank/hoeffding.hpp"
#include "urank/model.hpp"

namespace urank {

/// Shared configuration of the Monte-Carlo studies. Each study reads the
/// fields it needs and validates them.
struct ExperimentConfig {
  std::optional<DiscreteDistribution> oracle;  // wn-decay, variance, coverage
  std::optional<GenerativeModel> model;        // rate
  std::optional<RuleClass> rules;              // wn-decay, variance, coverage
  std::optional<ThresholdFamily> family;       // rate
  std::vector<std::size_t> n_grid;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  double delta = 0.1;
  double epsilon = 0.1;
  unsigned threads = 1;

  // variance
  std::vector<double> alpha_grid{0.0, 0.25, 0.5, 0.75, 1.0};

  // coverage
  std::size_t n = 100;
  std::size_t complexity_reps = 50;
  std::size_t calibration_runs = 500;
  std::size_t test_runs = 500;
};

/// Ordinary least squares of log(value) on log(n).
struct RateFit {
  std::vector<std::pair<double, double>> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Fits from >= 3 strictly positive values; throws ValidationError otherwise.
RateFit fit_loglog(std::span<const double> ns, std::span<const double> values);

struct StudyCell {
  std::size_t n = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  double companion = 0.0;
};

struct StudySummary {
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double companion_mean = 0.0;
  double companion_std_error = 0.0;
};

/// Per-(n, rep) values, per-n summaries and the log-log fit of the means.
/// `fit` is empty with status "degenerate" when some mean is not positive.
struct StudyResult {
  std::string name;
  std::string value_label;
  std::string companion_label;
  std::vector<StudyCell> cells;
  std::vector<StudySummary> summary;
  std::optional<RateFit> fit;
  std::optional<RateFit> companion_fit;
  std::string status = "ok";
  /// Means non-increasing in n up to 2 joint standard errors.
  bool monotone = true;
};

/// E sup_r |W_n(r)| (companion: E sup_r |T_n(r)|) over the n grid.
StudyResult wn_decay_study(const ExperimentConfig& config);

/// E[L(r_n) - L*] for threshold-family ERM on a scalar model.
StudyResult excess_risk_rate_study(const ExperimentConfig& config);

struct VarianceRow {
  std::string id;
  double excess = 0.0;
  double var_h = 0.0;
  bool excluded = false;
};

struct AlphaFit {
  double alpha = 0.0;
  /// Smallest c with Var h_r <= c Λ(r)^α over the class; infinite when no
  /// finite c exists.
  double c = 0.0;
  bool feasible = false;
};

struct VarianceStudy {
  std::vector<VarianceRow> rows;
  std::vector<AlphaFit> fits;
  /// Largest feasible α of the grid and its constant.
  std::optional<AlphaFit> best;
};

/// Var h_r against Λ(r) for every rule, exactly on the discrete oracle.
VarianceStudy variance_condition_study(const RuleClass& rules, const DiscreteDistribution& oracle,
                                       std::span<const double> alpha_grid);

/// Var(h_r(X, Y)) by exact summation.
double projection_variance(const RankingRule& rule, const RankingRule& bayes, const DiscreteDistribution& oracle);

struct CoverageRun {
  std::size_t index = 0;
  bool calibration = false;
  std::uint64_t seed = 0;
  double sup_wn = 0.0;
  double rhs_shape = 0.0;
  double ratio = 0.0;
};

struct CoverageStudy {
  std::vector<CoverageRun> runs;
  double fitted_c = 0.0;
  double coverage = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double delta = 0.1;
};

/// Fits C as the (1 - δ) empirical quantile of sup|W_n| / rhs over the
/// calibration runs, then reports the fraction of fresh runs it covers.
CoverageStudy coverage_study(const ExperimentConfig& config);

/// Fraction of ratios <= c.
double coverage_at(double c, std::span<const double> ratios);

}  // namespace urank
