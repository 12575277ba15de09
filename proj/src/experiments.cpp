#include "urank/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <fmt/format.h>

#include "urank/parallel.hpp"
#include "urank/rng.hpp"

namespace urank {

namespace {

void validate_grid(const ExperimentConfig& config) {
  if (config.n_grid.empty()) throw ValidationError("n_grid must not be empty");
  for (std::size_t k = 0; k < config.n_grid.size(); ++k) {
    if (config.n_grid[k] < 2) throw ValidationError("every n in n_grid must be at least 2");
    if (k > 0 && config.n_grid[k] <= config.n_grid[k - 1]) {
      throw ValidationError("n_grid must be strictly increasing");
    }
  }
  if (config.reps < 2) throw ValidationError("reps must be at least 2");
  if (!(config.delta > 0.0 && config.delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
}

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanSe mean_se(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

// Runs fn(n, rep, seed) -> (value, companion) over the grid and aggregates.
template <typename Fn>
StudyResult run_grid(const ExperimentConfig& config, Fn&& fn) {
  StudyResult result;
  const std::size_t reps = config.reps;
  result.cells.resize(config.n_grid.size() * reps);
  for (std::size_t a = 0; a < config.n_grid.size(); ++a) {
    for (std::size_t r = 0; r < reps; ++r) {
      auto& cell = result.cells[a * reps + r];
      cell.n = config.n_grid[a];
      cell.rep = r;
      cell.seed = derive_seed(config.seed, cell.n, r);
    }
  }
  parallel_for(result.cells.size(), config.threads, [&](std::size_t k) {
    auto& cell = result.cells[k];
    std::tie(cell.value, cell.companion) = fn(cell.n, cell.seed);
  });

  std::vector<double> ns;
  std::vector<double> means;
  std::vector<double> companions;
  for (std::size_t a = 0; a < config.n_grid.size(); ++a) {
    std::vector<double> values(reps);
    std::vector<double> other(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      values[r] = result.cells[a * reps + r].value;
      other[r] = result.cells[a * reps + r].companion;
    }
    const MeanSe v = mean_se(values);
    const MeanSe c = mean_se(other);
    result.summary.push_back({config.n_grid[a], v.mean, v.std_error, c.mean, c.std_error});
    ns.push_back(static_cast<double>(config.n_grid[a]));
    means.push_back(v.mean);
    companions.push_back(c.mean);
  }
  for (std::size_t a = 1; a < result.summary.size(); ++a) {
    const auto& prev = result.summary[a - 1];
    const auto& cur = result.summary[a];
    const double joint = std::sqrt(prev.std_error * prev.std_error + cur.std_error * cur.std_error);
    if (cur.mean > prev.mean + 2.0 * joint) result.monotone = false;
  }
  const auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
  };
  if (ns.size() >= 3 && positive(means)) {
    result.fit = fit_loglog(ns, means);
  } else {
    result.status = ns.size() < 3 ? "too few grid points" : "degenerate";
  }
  if (ns.size() >= 3 && positive(companions)) result.companion_fit = fit_loglog(ns, companions);
  return result;
}

}  // namespace

RateFit fit_loglog(std::span<const double> ns, std::span<const double> values) {
  if (ns.size() != values.size()) throw ValidationError("fit inputs have different lengths");
  if (ns.size() < 3) throw ValidationError("a rate fit needs at least 3 points");
  RateFit fit;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (!(ns[k] > 0.0) || !(values[k] > 0.0)) throw ValidationError("a log-log fit needs positive values");
    fit.points.emplace_back(std::log(ns[k]), std::log(values[k]));
  }
  const double m = static_cast<double>(fit.points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("a log-log fit needs distinct n values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : fit.points) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

StudyResult wn_decay_study(const ExperimentConfig& config) {
  validate_grid(config);
  if (!config.oracle) throw ValidationError("wn-decay needs an exact discrete oracle");
  if (!config.rules) throw ValidationError("wn-decay needs a materialized rule class");
  const DiscreteDistribution& dist = *config.oracle;
  const Oracle oracle = dist;
  const RankingRule bayes = bayes_rule(dist);
  const RuleClass& rules = *config.rules;

  StudyResult result = run_grid(config, [&](std::size_t n, std::uint64_t seed) {
    const LabeledSample s = sample(dist, n, seed);
    double sup_w = 0.0;
    double sup_t = 0.0;
    for (const auto& rule : rules.rules()) {
      const KernelTable table = decompose(s, rule, bayes, oracle);
      sup_w = std::max(sup_w, std::abs(table.w_n()));
      sup_t = std::max(sup_t, std::abs(table.t_n()));
    }
    return std::pair{sup_w, sup_t};
  });
  result.name = "wn-decay";
  result.value_label = "sup_abs_wn";
  result.companion_label = "sup_abs_tn";
  return result;
}

StudyResult excess_risk_rate_study(const ExperimentConfig& config) {
  validate_grid(config);
  if (!config.model) throw ValidationError("rate study needs a generative model");
  if (!config.family) throw ValidationError("rate study needs a threshold family");
  const GenerativeModel& model = *config.model;
  ThresholdFamily family = *config.family;
  const UniformBox& box = model.box();
  if (family.kind == ThresholdKind::shift && family.period <= 0.0) family.period = 2.0 * (box.hi - box.lo);
  if (family.kind == ThresholdKind::shift && !(family.period > box.hi - box.lo)) {
    throw ValidationError("shift period must exceed the width of the feature box");
  }

  const double l_star = bayes_risk(model);
  double best = std::numeric_limits<double>::infinity();
  constexpr int kProbe = 64;
  for (int k = -1; k <= kProbe + 1; ++k) {
    const double theta = k < 0             ? -std::numeric_limits<double>::infinity()
                         : k > kProbe      ? std::numeric_limits<double>::infinity()
                                           : box.lo + (box.hi - box.lo) * k / kProbe;
    best = std::min(best, threshold_risk(model, family.kind, theta) - l_star);
  }
  if (best > 1e-9) {
    throw ValidationError(fmt::format(
        "the {} family has no near-Bayes rule (best excess {:.3g}); approximation error would mask the rate",
        to_string(family.kind), best));
  }

  StudyResult result = run_grid(config, [&](std::size_t n, std::uint64_t seed) {
    const LabeledSample s = sample(model, n, seed);
    const ErmResult erm = erm_threshold_scan(s, family);
    const double theta = erm.minimizer.scorer_fn()->theta();
    const double excess = std::max(0.0, threshold_risk(model, family.kind, theta) - l_star);
    return std::pair{excess, erm.min_risk};
  });
  result.name = "rate";
  result.value_label = "excess_risk";
  result.companion_label = "empirical_min_risk";
  return result;
}

double projection_variance(const RankingRule& rule, const RankingRule& bayes, const DiscreteDistribution& oracle) {
  const Oracle o = oracle;
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t a = 0; a < oracle.size(); ++a) {
    const double h = h_projection(rule, bayes, {oracle.x(a), oracle.y(a)}, o);
    mean += oracle.prob(a) * h;
    second += oracle.prob(a) * h * h;
  }
  return std::max(0.0, second - mean * mean);
}

VarianceStudy variance_condition_study(const RuleClass& rules, const DiscreteDistribution& oracle,
                                       std::span<const double> alpha_grid) {
  if (alpha_grid.empty()) throw ValidationError("alpha_grid must not be empty");
  for (double a : alpha_grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("alpha values must lie in [0, 1]");
  }
  constexpr double kZero = 1e-15;
  const RankingRule bayes = bayes_rule(oracle);
  VarianceStudy study;
  bool any_positive = false;
  for (const auto& rule : rules.rules()) {
    VarianceRow row;
    row.id = rule.id();
    row.excess = true_excess(rule, bayes, oracle);
    row.var_h = projection_variance(rule, bayes, oracle);
    row.excluded = row.excess <= kZero && row.var_h <= kZero;
    if (row.excess > kZero) any_positive = true;
    study.rows.push_back(std::move(row));
  }
  if (!any_positive) throw ValidationError("every rule has zero excess risk; the variance condition is vacuous");

  for (double alpha : alpha_grid) {
    AlphaFit fit{alpha, 0.0, true};
    for (const auto& row : study.rows) {
      if (row.excluded) continue;
      if (row.excess <= kZero) {
        if (alpha > 0.0) {
          fit.feasible = false;
          fit.c = std::numeric_limits<double>::infinity();
          break;
        }
        fit.c = std::max(fit.c, row.var_h);
        continue;
      }
      fit.c = std::max(fit.c, row.var_h / std::pow(row.excess, alpha));
    }
    study.fits.push_back(fit);
  }
  for (const auto& fit : study.fits) {
    if (fit.feasible && (!study.best || fit.alpha > study.best->alpha)) study.best = fit;
  }
  return study;
}

double coverage_at(double c, std::span<const double> ratios) {
  if (ratios.empty()) return 0.0;
  const auto covered = std::count_if(ratios.begin(), ratios.end(), [c](double r) { return r <= c; });
  return static_cast<double>(covered) / static_cast<double>(ratios.size());
}

CoverageStudy coverage_study(const ExperimentConfig& config) {
  if (!config.oracle) throw ValidationError("coverage study needs an exact discrete oracle");
  if (!config.rules) throw ValidationError("coverage study needs a materialized rule class");
  if (config.n < 2) throw ValidationError("coverage study needs n >= 2");
  if (config.calibration_runs < 1 || config.test_runs < 1) {
    throw ValidationError("coverage study needs at least one calibration run and one test run");
  }
  if (!(config.delta > 0.0 && config.delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  const DiscreteDistribution& dist = *config.oracle;
  const Oracle oracle = dist;
  const RankingRule bayes = bayes_rule(dist);

  CoverageStudy study;
  study.delta = config.delta;
  const std::size_t total = config.calibration_runs + config.test_runs;
  study.runs.resize(total);
  parallel_for(total, config.threads, [&](std::size_t k) {
    auto& run = study.runs[k];
    run.index = k;
    run.calibration = k < config.calibration_runs;
    run.seed = derive_seed(config.seed, config.n, k);
    const LabeledSample s = sample(dist, config.n, run.seed);
    const auto tables = class_tables(s, *config.rules, bayes, oracle);
    const BoundReport report = bound_report(tables, config.delta, config.complexity_reps, mix64(run.seed));
    run.sup_wn = report.observed_sup_wn;
    run.rhs_shape = report.rhs_shape;
    run.ratio = run.sup_wn / run.rhs_shape;
  });

  std::vector<double> calibration;
  std::vector<double> test;
  for (const auto& run : study.runs) (run.calibration ? calibration : test).push_back(run.ratio);
  std::sort(calibration.begin(), calibration.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil((1.0 - config.delta) * static_cast<double>(calibration.size()) - 1e-9));
  study.fitted_c = calibration[std::clamp<std::size_t>(rank, 1, calibration.size()) - 1];
  study.coverage = coverage_at(study.fitted_c, test);
  const double m = static_cast<double>(test.size());
  study.std_error = std::sqrt(study.coverage * (1.0 - study.coverage) / m);
  // Wilson score interval at 95%.
  const double z = 1.959963984540054;
  const double centre = (study.coverage + z * z / (2 * m)) / (1 + z * z / m);
  const double half =
      z * std::sqrt(study.coverage * (1 - study.coverage) / m + z * z / (4 * m * m)) / (1 + z * z / m);
  study.ci_low = std::max(0.0, centre - half);
  study.ci_high = std::min(1.0, centre + half);
  return study;
}

}  // namespace urank
