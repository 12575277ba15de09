#include "urank/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "urank/detail/fenwick.hpp"
#include "urank/parallel.hpp"

namespace urank {

namespace {

inline bool is_error(int sign, double y, double yp) noexcept { return sign > 0 ? y < yp : y > yp; }

std::uint64_t ordered_pairs(std::size_t n) { return static_cast<std::uint64_t>(n) * (n - 1); }

RiskReport make_report(std::size_t n, std::uint64_t errors) {
  const std::uint64_t pairs = ordered_pairs(n);
  return {static_cast<double>(errors) / static_cast<double>(pairs), pairs, errors};
}

}  // namespace

std::uint64_t count_errors(const PreparedRule& rule, std::span<const double> ys, unsigned threads) {
  const std::size_t n = ys.size();
  std::vector<std::uint64_t> per_row(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::uint64_t row = 0;
    const double yi = ys[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && is_error(rule(i, j), yi, ys[j])) ++row;
    }
    per_row[i] = row;
  });
  return std::accumulate(per_row.begin(), per_row.end(), std::uint64_t{0});
}

RiskReport empirical_risk_naive(const LabeledSample& sample, const RankingRule& rule, unsigned threads) {
  const PreparedRule r = rule.prepare(sample.points());
  return make_report(sample.size(), count_errors(r, sample.ys(), threads));
}

std::optional<RiskReport> empirical_risk_fast(const LabeledSample& sample, const RankingRule& rule) {
  if (!rule.is_scorer()) throw ValidationError("fast empirical risk requires a scorer rule");
  const std::size_t n = sample.size();
  const PreparedRule r = rule.prepare(sample.points());
  const auto scores = r.scores();

  std::vector<double> labels(sample.ys().begin(), sample.ys().end());
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  for (std::size_t k = 1; k < n; ++k) {
    if (scores[order[k - 1]] == scores[order[k]]) return std::nullopt;
  }

  // Walk items by increasing score; an inversion is an earlier (lower
  // score) item with a larger label. Each one is an error in both orders.
  detail::Fenwick seen(n);
  std::uint64_t inversions = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = sample.y(order[k]);
    const auto rank = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), y) - labels.begin());
    inversions += static_cast<std::uint64_t>(static_cast<std::int64_t>(k) - seen.prefix(rank + 1));
    seen.add(rank, 1);
  }
  std::uint64_t errors = 2 * inversions;
  if (r.negated()) errors = ordered_pairs(n) - errors;
  return make_report(n, errors);
}

RiskReport empirical_risk(const LabeledSample& sample, const RankingRule& rule, unsigned threads) {
  if (rule.is_scorer()) {
    if (auto fast = empirical_risk_fast(sample, rule)) return *fast;
  }
  return empirical_risk_naive(sample, rule, threads);
}

int excess_kernel_q(const RankingRule& rule, const RankingRule& bayes, Observation z, Observation zp) {
  const int err_rule = is_error(rule(z.x, zp.x), z.y, zp.y) ? 1 : 0;
  const int err_bayes = is_error(bayes(z.x, zp.x), z.y, zp.y) ? 1 : 0;
  return err_rule - err_bayes;
}

double empirical_excess_risk(const LabeledSample& sample, const RankingRule& rule, const RankingRule& bayes,
                             unsigned threads) {
  const RiskReport a = empirical_risk(sample, rule, threads);
  const RiskReport b = empirical_risk(sample, bayes, threads);
  const auto diff = static_cast<std::int64_t>(a.error_pair_count) - static_cast<std::int64_t>(b.error_pair_count);
  return static_cast<double>(diff) / static_cast<double>(a.ordered_pair_count);
}

double true_excess(const RankingRule& rule, const RankingRule& bayes, const DiscreteDistribution& dist) {
  const PreparedRule r = rule.prepare(dist.points());
  const PreparedRule rb = bayes.prepare(dist.points());
  double total = 0.0;
  for (std::size_t a = 0; a < dist.size(); ++a) {
    for (std::size_t b = 0; b < dist.size(); ++b) {
      const int q = (is_error(r(a, b), dist.y(a), dist.y(b)) ? 1 : 0) -
                    (is_error(rb(a, b), dist.y(a), dist.y(b)) ? 1 : 0);
      if (q != 0) total += q * dist.prob(a) * dist.prob(b);
    }
  }
  return total;
}

McEstimate true_excess(const RankingRule& rule, const RankingRule& bayes, const GenerativeModel& model,
                       std::size_t budget, std::uint64_t seed) {
  if (budget < 2) throw ValidationError("Monte-Carlo excess risk needs a budget of at least 2 pairs");
  const std::size_t d = model.dim();
  std::vector<double> x(d);
  std::vector<double> xp(d);
  CounterRng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < budget; ++k) {
    const double y = model.draw(rng, x);
    const double yp = model.draw(rng, xp);
    const double q = excess_kernel_q(rule, bayes, {x, y}, {xp, yp});
    sum += q;
    sum_sq += q * q;
  }
  const double n = static_cast<double>(budget);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

}  // namespace urank
