#include "urank/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "urank/parallel.hpp"

namespace urank {

namespace {

void check_inputs(std::span<const KernelTable> tables, std::span<const int> eps) {
  if (tables.empty()) throw ValidationError("rule class must not be empty");
  for (const auto& t : tables) {
    if (!t.has_matrix()) throw ValidationError("kernel table was released; rebuild it with the matrix");
    if (t.size() != eps.size()) throw ValidationError("sign vector length does not match the sample size");
  }
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

RademacherEstimate summarize(Quantity q, std::vector<double> values, std::uint64_t seed) {
  RademacherEstimate est;
  est.quantity = q;
  est.reps = values.size();
  est.seed = seed;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - est.mean) * (v - est.mean);
  est.std_error = std::sqrt(ss / (n - 1.0) / n);
  est.values = std::move(values);
  return est;
}

}  // namespace

const char* to_string(Quantity q) noexcept {
  switch (q) {
    case Quantity::Z:
      return "Z";
    case Quantity::U:
      return "U";
    case Quantity::M:
      return "M";
  }
  return "?";
}

std::vector<int> draw_rademacher(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<int> eps(n);
  for (auto& e : eps) e = rng.rademacher();
  return eps;
}

std::vector<double> column_sums(const KernelTable& table, std::span<const int> eps, bool include_diagonal) {
  const std::size_t n = table.size();
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = table.row(i);
    const double e = eps[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i || include_diagonal) g[j] += e * row[j];
    }
  }
  return g;
}

double z_chaos(std::span<const KernelTable> tables, std::span<const int> eps, bool include_diagonal) {
  check_inputs(tables, eps);
  double best = 0.0;
  for (const auto& t : tables) {
    const auto g = column_sums(t, eps, include_diagonal);
    double form = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) form += eps[j] * g[j];
    best = std::max(best, std::abs(form));
  }
  return best;
}

double u_chaos(std::span<const KernelTable> tables, std::span<const int> eps, bool include_diagonal) {
  check_inputs(tables, eps);
  double best = 0.0;
  for (const auto& t : tables) best = std::max(best, norm2(column_sums(t, eps, include_diagonal)));
  return best;
}

double m_stat(std::span<const KernelTable> tables, std::span<const int> eps, bool include_diagonal) {
  check_inputs(tables, eps);
  double best = 0.0;
  for (const auto& t : tables) best = std::max(best, max_abs(column_sums(t, eps, include_diagonal)));
  return best;
}

std::vector<KernelTable> class_tables(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes,
                                      const Oracle& oracle, unsigned threads) {
  std::vector<KernelTable> tables;
  tables.reserve(rules.size());
  for (const auto& rule : rules.rules()) tables.push_back(decompose(sample, rule, bayes, oracle, threads));
  return tables;
}

double z_chaos(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes, const Oracle& oracle,
               std::span<const int> eps, bool include_diagonal) {
  const auto tables = class_tables(sample, rules, bayes, oracle);
  return z_chaos(tables, eps, include_diagonal);
}

double u_chaos(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes, const Oracle& oracle,
               std::span<const int> eps, bool include_diagonal) {
  const auto tables = class_tables(sample, rules, bayes, oracle);
  return u_chaos(tables, eps, include_diagonal);
}

double m_stat(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes, const Oracle& oracle,
              std::span<const int> eps, bool include_diagonal) {
  const auto tables = class_tables(sample, rules, bayes, oracle);
  return m_stat(tables, eps, include_diagonal);
}

ComplexityEstimates estimate_complexities(std::span<const KernelTable> tables, std::size_t reps, std::uint64_t seed,
                                          bool include_diagonal, unsigned threads) {
  if (reps < 2) throw ValidationError("complexity estimation needs at least 2 replicates");
  if (tables.empty()) throw ValidationError("rule class must not be empty");
  const std::size_t n = tables.front().size();
  std::vector<double> z(reps), u(reps), m(reps);
  parallel_for(reps, threads, [&](std::size_t k) {
    const auto eps = draw_rademacher(n, seed + k);
    check_inputs(tables, eps);
    double zk = 0.0, uk = 0.0, mk = 0.0;
    for (const auto& t : tables) {
      const auto g = column_sums(t, eps, include_diagonal);
      double form = 0.0;
      for (std::size_t j = 0; j < n; ++j) form += eps[j] * g[j];
      zk = std::max(zk, std::abs(form));
      uk = std::max(uk, norm2(g));
      mk = std::max(mk, max_abs(g));
    }
    z[k] = zk;
    u[k] = uk;
    m[k] = mk;
  });
  return {summarize(Quantity::Z, std::move(z), seed), summarize(Quantity::U, std::move(u), seed),
          summarize(Quantity::M, std::move(m), seed)};
}

ComplexityEstimates estimate_complexities(const LabeledSample& sample, const RuleClass& rules,
                                          const RankingRule& bayes, const Oracle& oracle, std::size_t reps,
                                          std::uint64_t seed, bool include_diagonal, unsigned threads) {
  const auto tables = class_tables(sample, rules, bayes, oracle, threads);
  return estimate_complexities(tables, reps, seed, include_diagonal, threads);
}

double sup_abs_wn(std::span<const KernelTable> tables) {
  double best = 0.0;
  for (const auto& t : tables) best = std::max(best, std::abs(t.w_n()));
  return best;
}

BoundReport bound_report(std::span<const KernelTable> tables, double delta, std::size_t reps, std::uint64_t seed,
                         bool include_diagonal, unsigned threads) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  BoundReport report;
  report.estimates = estimate_complexities(tables, reps, seed, include_diagonal, threads);
  report.n = tables.front().size();
  report.delta = delta;
  const double n = static_cast<double>(report.n);
  const double log_term = std::log(1.0 / delta);
  report.term_z = report.estimates.z.mean / (n * n);
  report.term_u = report.estimates.u.mean * std::sqrt(log_term) / (n * n);
  report.term_m = report.estimates.m.mean * log_term / (n * n);
  report.term_log = log_term / n;
  report.rhs_shape = report.term_z + report.term_u + report.term_m + report.term_log;
  report.observed_sup_wn = sup_abs_wn(tables);
  return report;
}

BoundReport bound_report(const LabeledSample& sample, const RuleClass& rules, const RankingRule& bayes,
                         const Oracle& oracle, double delta, std::size_t reps, std::uint64_t seed,
                         bool include_diagonal, unsigned threads) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  const auto tables = class_tables(sample, rules, bayes, oracle, threads);
  return bound_report(tables, delta, reps, seed, include_diagonal, threads);
}

}  // namespace urank
