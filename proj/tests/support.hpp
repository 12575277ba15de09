#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "urank/model.hpp"
#include "urank/rng.hpp"

// Random instances and brute-force reference evaluations written directly
// from the definitions, independent of the library's prepared/fast paths.
namespace urank::testing {

inline DiscreteDistribution random_distribution(CounterRng& rng, std::size_t atoms, bool distinct_y = false,
                                                int x_values = 4) {
  std::vector<double> xs, ys, ps;
  double total = 0.0;
  for (std::size_t a = 0; a < atoms; ++a) {
    xs.push_back(static_cast<double>(static_cast<int>(rng.uniform() * x_values)));
    ys.push_back(distinct_y ? static_cast<double>(a) + rng.uniform() * 0.5
                            : static_cast<double>(static_cast<int>(rng.uniform() * 3)));
    ps.push_back(0.05 + rng.uniform());
    total += ps.back();
  }
  for (auto& p : ps) p /= total;
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < atoms; ++a) sum += ps[a];
  ps.back() = 1.0 - sum;
  return DiscreteDistribution(1, std::move(xs), std::move(ys), std::move(ps));
}

inline RankingRule random_threshold_rule(CounterRng& rng, const std::string& id, double lo = -0.5,
                                         double hi = 4.5) {
  const double theta = rng.uniform(lo, hi);
  if (rng.uniform() < 0.5) return RankingRule::scorer(id, ScalarFn::step(theta));
  RankingRule rule = RankingRule::scorer(id, ScalarFn::shift(theta, 2.0 * (hi - lo)));
  return rng.uniform() < 0.3 ? rule.negated(id) : rule;
}

inline LabeledSample random_tie_free(CounterRng& rng, std::size_t n) {
  std::vector<double> xs(n), ys(n);
  for (auto& x : xs) x = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) ys[i] = xs[i] + 0.3 * rng.normal();
  return LabeledSample::from_scalar(std::move(xs), std::move(ys));
}

inline bool is_error(double y, double yp, int r) { return (y - yp) * r < 0; }

inline double brute_risk(const LabeledSample& s, const RankingRule& rule) {
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (i != j && is_error(s.y(i), s.y(j), rule(s.x(i), s.x(j)))) ++errors;
    }
  }
  return static_cast<double>(errors) / static_cast<double>(s.size() * (s.size() - 1));
}

inline double brute_true_risk(const RankingRule& rule, const DiscreteDistribution& d) {
  double risk = 0.0;
  for (std::size_t a = 0; a < d.size(); ++a) {
    for (std::size_t b = 0; b < d.size(); ++b) {
      if (is_error(d.y(a), d.y(b), rule(d.x(a), d.x(b)))) risk += d.prob(a) * d.prob(b);
    }
  }
  return risk;
}

inline int brute_q(const RankingRule& r, const RankingRule& bayes, std::span<const double> x, double y,
                   std::span<const double> xp, double yp) {
  return static_cast<int>(is_error(y, yp, r(x, xp))) - static_cast<int>(is_error(y, yp, bayes(x, xp)));
}

inline double brute_qbar(const RankingRule& r, const RankingRule& bayes, std::span<const double> x, double y,
                         std::span<const double> xp, double yp) {
  return 0.5 * (brute_q(r, bayes, x, y, xp, yp) + brute_q(r, bayes, xp, yp, x, y));
}

inline double brute_lambda(const RankingRule& r, const RankingRule& bayes, const DiscreteDistribution& d) {
  double sum = 0.0;
  for (std::size_t a = 0; a < d.size(); ++a) {
    for (std::size_t b = 0; b < d.size(); ++b) {
      sum += d.prob(a) * d.prob(b) * brute_q(r, bayes, d.x(a), d.y(a), d.x(b), d.y(b));
    }
  }
  return sum;
}

inline double brute_h(const RankingRule& r, const RankingRule& bayes, const DiscreteDistribution& d,
                      std::span<const double> x, double y) {
  double sum = 0.0;
  for (std::size_t b = 0; b < d.size(); ++b) sum += d.prob(b) * brute_qbar(r, bayes, x, y, d.x(b), d.y(b));
  return sum - brute_lambda(r, bayes, d);
}

inline double brute_hhat(const RankingRule& r, const RankingRule& bayes, const DiscreteDistribution& d,
                         std::span<const double> x, double y, std::span<const double> xp, double yp) {
  return brute_qbar(r, bayes, x, y, xp, yp) - brute_lambda(r, bayes, d) - brute_h(r, bayes, d, x, y) -
         brute_h(r, bayes, d, xp, yp);
}

}  // namespace urank::testing
