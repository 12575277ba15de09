#include <doctest.h>

#include <cmath>

#include "../support.hpp"
#include "urank/experiments.hpp"

using namespace urank;

namespace {

DiscreteDistribution six_atoms() {
  std::vector<double> xs, ys, ps;
  const double eta[3] = {0.2, 0.45, 0.8};
  for (int x = 0; x < 3; ++x) {
    xs.insert(xs.end(), {double(x), double(x)});
    ys.insert(ys.end(), {-1.0, 1.0});
    ps.insert(ps.end(), {(1 - eta[x]) / 3, eta[x] / 3});
  }
  return DiscreteDistribution(1, xs, ys, ps);
}

RuleClass reference_class() {
  const std::vector<double> steps{-0.5, 0.5, 1.5, 2.5}, shifts{0.5, 1.5};
  auto rules = RuleClass::threshold_grid(ThresholdKind::step, steps).rules();
  const auto shift_grid = RuleClass::threshold_grid(ThresholdKind::shift, shifts, 10.0);
  for (const auto& r : shift_grid.rules()) rules.push_back(r);
  return RuleClass(rules, 2);
}

DiscreteDistribution discretized_eta(int cells) {
  std::vector<double> xs, ys, ps;
  for (int k = 0; k < cells; ++k) {
    const double x = (k + 0.5) / cells;
    xs.insert(xs.end(), {x, x});
    ys.insert(ys.end(), {-1.0, 1.0});
    ps.insert(ps.end(), {(1.0 - x) / cells, x / cells});
  }
  return DiscreteDistribution(1, xs, ys, ps);
}

}  // namespace

TEST_CASE("log-log fit") {
  const std::vector<double> ns{10, 20, 40, 80};
  std::vector<double> v;
  for (double n : ns) v.push_back(3.0 * std::pow(n, -0.75));
  const RateFit fit = fit_loglog(ns, v);
  CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK(fit.points.size() == 4);
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(fit_loglog(two, two), ValidationError);
  const std::vector<double> zero{1, 0, 1, 1};
  CHECK_THROWS_AS(fit_loglog(ns, zero), ValidationError);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.oracle = six_atoms();
  c.rules = reference_class();
  c.n_grid = {10, 10, 20};
  CHECK_THROWS_AS(wn_decay_study(c), ValidationError);
  c.n_grid = {1, 10, 20};
  CHECK_THROWS_AS(wn_decay_study(c), ValidationError);
  c.n_grid = {10, 20, 40};
  c.reps = 1;
  CHECK_THROWS_AS(wn_decay_study(c), ValidationError);
  c.reps = 3;
  c.epsilon = 1.0;
  CHECK_THROWS_AS(wn_decay_study(c), ValidationError);
  c.epsilon = 0.1;
  c.oracle.reset();
  CHECK_THROWS_AS(wn_decay_study(c), ValidationError);
}

TEST_CASE("wn-decay with only the Bayes rule is degenerate") {
  ExperimentConfig c;
  c.oracle = six_atoms();
  c.rules = RuleClass({bayes_rule(*c.oracle)});
  c.n_grid = {20, 40, 80};
  c.reps = 5;
  const auto r = wn_decay_study(c);
  CHECK(r.status == "degenerate");
  CHECK_FALSE(r.fit.has_value());
  for (const auto& cell : r.cells) CHECK(cell.value == 0.0);
}

TEST_CASE("studies do not depend on the thread count") {
  ExperimentConfig c;
  c.oracle = six_atoms();
  c.rules = reference_class();
  c.n_grid = {20, 40, 80};
  c.reps = 6;
  c.seed = 99;
  const auto a = wn_decay_study(c);
  c.threads = 4;
  const auto b = wn_decay_study(c);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    CHECK(a.cells[k].seed == b.cells[k].seed);
    CHECK(a.cells[k].value == b.cells[k].value);
    CHECK(a.cells[k].companion == b.cells[k].companion);
  }
  CHECK(a.fit->slope == b.fit->slope);
}

TEST_CASE("wn-decay slope is stable when the replicates double") {
  ExperimentConfig c;
  c.oracle = six_atoms();
  c.rules = reference_class();
  c.n_grid = {50, 100, 200, 400};
  c.reps = 100;
  c.seed = 5;
  const double s1 = wn_decay_study(c).fit->slope;
  c.reps = 200;
  const double s2 = wn_decay_study(c).fit->slope;
  CHECK(std::abs(s1 - s2) < 0.1);
}

TEST_CASE("variance condition") {
  const auto d = discretized_eta(10);
  const auto bayes = bayes_rule(d);
  const std::vector<double> thetas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const auto cls = RuleClass::threshold_grid(ThresholdKind::step, thetas).with(bayes);
  const std::vector<double> alphas{0.0, 0.5, 1.0};
  const auto study = variance_condition_study(cls, d, alphas);
  CHECK(study.rows.back().excluded);  // the Bayes rule: both sides vanish
  REQUIRE(study.best.has_value());
  CHECK(study.best->alpha == 1.0);
  CHECK(std::isfinite(study.best->c));
  for (const auto& row : study.rows) {
    if (!row.excluded) CHECK(row.var_h <= study.best->c * row.excess + 1e-15);
  }
  CHECK_THROWS_AS(variance_condition_study(RuleClass({bayes}), d, alphas), ValidationError);
}

TEST_CASE("Var h_r never exceeds 1 on random discrete models") {
  CounterRng rng(13);
  double worst = 0.0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto d = testing::random_distribution(rng, 2 + trial % 7, false, 2 + trial % 4);
    const auto bayes = bayes_rule(d);
    for (int k = 0; k < 5; ++k) {
      worst = std::max(worst, projection_variance(testing::random_threshold_rule(rng, "r"), bayes, d));
      worst = std::max(worst, projection_variance(bayes.negated(), bayes, d));
    }
  }
  CHECK(worst <= 1.0);
  MESSAGE("largest Var h_r found: " << worst);
}

TEST_CASE("rate study") {
  SUBCASE("noiseless model has zero excess") {
    ExperimentConfig c;
    c.model = GenerativeModel::gaussian(ScalarFn::linear({1.0}), ScalarFn::constant(0.0));
    c.family = ThresholdFamily{ThresholdKind::shift, 0.0};
    c.n_grid = {20, 40, 80};
    c.reps = 4;
    const auto r = excess_risk_rate_study(c);
    for (const auto& cell : r.cells) CHECK(cell.value == 0.0);
    CHECK(r.status == "degenerate");
  }
  SUBCASE("a family without a near-Bayes rule is flagged") {
    ExperimentConfig c;
    c.model = GenerativeModel::binary_eta(ScalarFn::linear({1.0}));
    c.family = ThresholdFamily{ThresholdKind::step, 0.0};
    c.n_grid = {20, 40, 80};
    c.reps = 4;
    CHECK_THROWS_AS(excess_risk_rate_study(c), ValidationError);
  }
  SUBCASE("excess is small and reproducible") {
    ExperimentConfig c;
    c.model = GenerativeModel::binary_eta(ScalarFn::linear({1.0}), {0.25, 0.75, 1}, 2.0);
    c.family = ThresholdFamily{ThresholdKind::shift, 0.0};
    c.n_grid = {25, 50, 100};
    c.reps = 20;
    const auto a = excess_risk_rate_study(c);
    const auto b = excess_risk_rate_study(c);
    for (std::size_t k = 0; k < a.cells.size(); ++k) CHECK(a.cells[k].value == b.cells[k].value);
    for (const auto& s : a.summary) {
      CHECK(s.mean >= 0.0);
      CHECK(s.mean < 0.1);
    }
  }
}

TEST_CASE("coverage") {
  ExperimentConfig c;
  c.oracle = six_atoms();
  c.rules = RuleClass({bayes_rule(*c.oracle)});
  c.n = 20;
  c.complexity_reps = 5;
  c.calibration_runs = 10;
  c.test_runs = 10;
  CHECK(coverage_study(c).coverage == 1.0);

  const std::vector<double> ratios{0.5, 0.1, 0.9, 0.3};
  double last = -1.0;
  for (double cc : {0.0, 0.1, 0.2, 0.5, 0.9, 2.0}) {
    const double cov = coverage_at(cc, ratios);
    CHECK(cov >= last);
    last = cov;
  }
  CHECK(coverage_at(0.3, ratios) == 0.5);

  c.rules = reference_class();
  c.calibration_runs = 40;
  c.test_runs = 40;
  const auto s = coverage_study(c);
  CHECK(s.fitted_c > 0.0);
  CHECK(s.ci_low <= s.coverage);
  CHECK(s.coverage <= s.ci_high);
  std::size_t cal = 0;
  for (const auto& r : s.runs) cal += r.calibration ? 1 : 0;
  CHECK(cal == 40);
}
