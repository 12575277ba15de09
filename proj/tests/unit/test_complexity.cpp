#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support.hpp"
#include "oracle_values.hpp"
#include "urank/complexity.hpp"
#include "urank/experiments.hpp"

using namespace urank;

namespace {

// Best value of Σ_j g_j α_j over unit vectors on a 1-degree grid.
double grid_sup(const std::vector<double>& g) {
  constexpr double deg = std::numbers::pi / 180.0;
  double best = -INFINITY;
  if (g.size() == 2) {
    for (int a = 0; a < 360; ++a) best = std::max(best, g[0] * std::cos(a * deg) + g[1] * std::sin(a * deg));
    return best;
  }
  for (int t = 0; t <= 180; ++t) {
    for (int p = 0; p < 360; ++p) {
      const double al[3] = {std::sin(t * deg) * std::cos(p * deg), std::sin(t * deg) * std::sin(p * deg),
                            std::cos(t * deg)};
      best = std::max(best, g[0] * al[0] + g[1] * al[1] + g[2] * al[2]);
    }
  }
  return best;
}

struct Setup {
  DiscreteDistribution dist;
  RankingRule bayes;
  RuleClass rules;
};

Setup threshold_setup() {
  // eta = (0.2, 0.45, 0.8) on x in {0, 1, 2}, uniform marginal.
  std::vector<double> xs, ys, ps;
  const double eta[3] = {0.2, 0.45, 0.8};
  for (int x = 0; x < 3; ++x) {
    xs.insert(xs.end(), {double(x), double(x)});
    ys.insert(ys.end(), {-1.0, 1.0});
    ps.insert(ps.end(), {(1 - eta[x]) / 3, eta[x] / 3});
  }
  DiscreteDistribution d(1, xs, ys, ps);
  auto bayes = bayes_rule(d);
  const std::vector<double> thetas{-0.5, 0.5, 1.5, 2.5};
  return {std::move(d), std::move(bayes), RuleClass::threshold_grid(ThresholdKind::step, thetas)};
}

}  // namespace

TEST_CASE("Rademacher draws") {
  CHECK(draw_rademacher(100, 5) == draw_rademacher(100, 5));
  CHECK(draw_rademacher(100, 5) != draw_rademacher(100, 6));
  const std::size_t n = 100000;
  const auto eps = draw_rademacher(n, 1);
  double sum = 0.0;
  for (int e : eps) {
    CHECK((e == 1 || e == -1));
    sum += e;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("hand-filled tables") {
  const std::vector<KernelTable> three{KernelTable::from_matrix(3, {0, 1, 0, 1, 0, 0, 0, 0, 0})};
  const std::vector<int> ones3{1, 1, 1};
  CHECK(z_chaos(three, ones3) == 2.0);

  const std::vector<KernelTable> two{KernelTable::from_matrix(2, {0, 1, 1, 0})};
  const std::vector<int> ones2{1, 1};
  CHECK(u_chaos(two, ones2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(u_chaos(two, ones2) - oracle::kUGridN2) < 1e-3);
  CHECK(m_stat(two, ones2) == 1.0);
  // The closed form dominates any particular unit vector, e.g. e_1.
  CHECK(u_chaos(two, ones2) >= column_sums(two[0], ones2)[0]);
  // The diagonal enters only on request.
  const std::vector<KernelTable> diag{KernelTable::from_matrix(2, {3, 1, 1, 0})};
  CHECK(z_chaos(diag, ones2) == 2.0);
  CHECK(z_chaos(diag, ones2, true) == 5.0);
  CHECK(m_stat(diag, ones2, true) == 4.0);
  const std::vector<KernelTable> none;
  CHECK_THROWS_AS(z_chaos(none, ones2), ValidationError);
  CHECK_THROWS_AS(z_chaos(two, ones3), ValidationError);
}

TEST_CASE("closed form of U agrees with a 1-degree grid search") {
  CounterRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 2;
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) m[i * n + j] = m[j * n + i] = rng.uniform(-2.0, 2.0);
    }
    const KernelTable t = KernelTable::from_matrix(n, m);
    const auto eps = draw_rademacher(n, trial);
    const std::vector<KernelTable> tables{t};
    CHECK(std::abs(u_chaos(tables, eps) - grid_sup(column_sums(t, eps))) < 1e-3);
  }
}

TEST_CASE("class containing only the Bayes rule") {
  const auto st = threshold_setup();
  const RuleClass only(std::vector<RankingRule>{st.bayes});
  const auto s = sample(st.dist, 30, 4);
  const auto eps = draw_rademacher(30, 2);
  CHECK(z_chaos(s, only, st.bayes, st.dist, eps) == 0.0);
  CHECK(u_chaos(s, only, st.bayes, st.dist, eps) == 0.0);
  CHECK(m_stat(s, only, st.bayes, st.dist, eps) == 0.0);
  const auto est = estimate_complexities(s, only, st.bayes, st.dist, 10, 3);
  for (const auto* e : {&est.z, &est.u, &est.m}) {
    CHECK(e->mean == 0.0);
    CHECK(e->std_error == 0.0);
  }
  const auto report = bound_report(s, only, st.bayes, st.dist, 0.1, 10, 3);
  CHECK(report.observed_sup_wn == 0.0);
  CHECK(report.rhs_shape > 0.0);
}

TEST_CASE("invariances of the sign statistics") {
  const auto st = threshold_setup();
  CounterRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = sample(st.dist, 25, trial);
    auto tables = class_tables(s, st.rules, st.bayes, st.dist);
    auto eps = draw_rademacher(25, 100 + trial);
    auto flipped = eps;
    for (auto& e : flipped) e = -e;
    const double z = z_chaos(tables, eps), u = u_chaos(tables, eps), m = m_stat(tables, eps);
    CHECK(z >= 0.0);
    CHECK(z_chaos(tables, flipped) == doctest::Approx(z).epsilon(1e-14));
    CHECK(u_chaos(tables, flipped) == doctest::Approx(u).epsilon(1e-14));
    CHECK(m_stat(tables, flipped) == doctest::Approx(m).epsilon(1e-14));
    // Reordering the class changes nothing.
    std::vector<KernelTable> reversed(tables.rbegin(), tables.rend());
    CHECK(z_chaos(reversed, eps) == z);
    CHECK(u_chaos(reversed, eps) == u);
    CHECK(m_stat(reversed, eps) == m);
    // A subset never exceeds the full class.
    const std::vector<KernelTable> subset(tables.begin(), tables.begin() + 2);
    CHECK(z_chaos(subset, eps) <= z);
    CHECK(u_chaos(subset, eps) <= u);
    CHECK(m_stat(subset, eps) <= m);
    // Per rule, the max-norm is bounded by the 2-norm.
    for (const auto& t : tables) {
      const std::vector<KernelTable> one{t};
      CHECK(m_stat(one, eps) <= u_chaos(one, eps) + 1e-15);
    }
  }
}

TEST_CASE("complexity estimates") {
  const auto st = threshold_setup();
  const auto s = sample(st.dist, 60, 9);
  const auto tables = class_tables(s, st.rules, st.bayes, st.dist);
  const auto a = estimate_complexities(tables, 200, 50);
  const auto b = estimate_complexities(tables, 400, 50);
  for (auto [x, y] : {std::pair{&a.z, &b.z}, std::pair{&a.u, &b.u}, std::pair{&a.m, &b.m}}) {
    CHECK(x->values.size() == 200);
    CHECK(std::abs(x->mean - y->mean) < 3.0 * std::hypot(x->std_error, y->std_error));
    // Replicate k draws from seed + k, so the first 200 values coincide.
    for (std::size_t k = 0; k < 200; ++k) CHECK(x->values[k] == y->values[k]);
  }
  const auto c = estimate_complexities(tables, 200, 50, false, 4);
  CHECK(c.z.values == a.z.values);
  CHECK_THROWS_AS(estimate_complexities(tables, 1, 50), ValidationError);
}

TEST_CASE("E Z / n^2 decays like 1/n") {
  const auto st = threshold_setup();
  std::vector<double> ns, values;
  for (std::size_t n : {50, 100, 200, 400}) {
    double total = 0.0;
    const int data_seeds = 6;
    for (int k = 0; k < data_seeds; ++k) {
      const auto s = sample(st.dist, n, derive_seed(31, n, k));
      total += estimate_complexities(s, st.rules, st.bayes, st.dist, 30, 7 * k).z.mean;
    }
    ns.push_back(double(n));
    values.push_back(total / data_seeds / (double(n) * double(n)));
  }
  const RateFit fit = fit_loglog(ns, values);
  CHECK(fit.slope > -1.3);
  CHECK(fit.slope < -0.7);
}

TEST_CASE("bound report") {
  const auto st = threshold_setup();
  const auto s = sample(st.dist, 80, 2);
  const auto tables = class_tables(s, st.rules, st.bayes, st.dist);
  const auto r = bound_report(tables, std::exp(-1.0), 40, 8);
  const double n = 80.0;
  const double expected = (r.estimates.z.mean + r.estimates.u.mean + r.estimates.m.mean) / (n * n) + 1.0 / n;
  CHECK(r.rhs_shape == doctest::Approx(expected).epsilon(1e-14));
  CHECK(r.term_log == doctest::Approx(1.0 / n).epsilon(1e-14));
  CHECK(r.observed_sup_wn == doctest::Approx(sup_abs_wn(tables)));
  CHECK_THROWS_AS(bound_report(tables, 0.0, 40, 8), ValidationError);
  CHECK_THROWS_AS(bound_report(tables, 1.0, 40, 8), ValidationError);
}
