#include "urank/hoeffding.hpp"

#include <numeric>

#include "urank/parallel.hpp"

namespace urank {

namespace {

inline int error_of(int sign, double y, double yp) noexcept {
  return (sign > 0 ? y < yp : y > yp) ? 1 : 0;
}

// Weighted reference points standing in for the law of (X', Y').
struct Reference {
  std::size_t dim = 1;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> weights;
  bool exact = true;

  std::size_t size() const noexcept { return ys.size(); }
};

Reference make_reference(const Oracle& oracle) {
  Reference ref;
  if (const auto* dist = std::get_if<DiscreteDistribution>(&oracle)) {
    ref.dim = dist->dim();
    ref.xs.assign(dist->xs().begin(), dist->xs().end());
    ref.ys.assign(dist->ys().begin(), dist->ys().end());
    ref.weights.assign(dist->probs().begin(), dist->probs().end());
    return ref;
  }
  const auto& mc = std::get<McOracle>(oracle);
  if (mc.budget < 2) throw ValidationError("Monte-Carlo oracle budget must be at least 2");
  ref.exact = false;
  ref.dim = mc.model.dim();
  ref.xs.resize(mc.budget * ref.dim);
  ref.ys.resize(mc.budget);
  ref.weights.assign(mc.budget, 1.0 / static_cast<double>(mc.budget));
  CounterRng rng(mc.seed);
  for (std::size_t b = 0; b < mc.budget; ++b) {
    ref.ys[b] = mc.model.draw(rng, std::span<double>(ref.xs).subspan(b * ref.dim, ref.dim));
  }
  return ref;
}

// Query points followed by reference points, with both rules prepared on
// the union so every cross evaluation is an index lookup.
struct Combined {
  std::size_t queries = 0;
  std::vector<double> xs;
  std::vector<double> ys;
  PreparedRule rule;
  PreparedRule bayes;

  double q(std::size_t i, std::size_t j) const noexcept {
    return error_of(rule(i, j), ys[i], ys[j]) - error_of(bayes(i, j), ys[i], ys[j]);
  }
  double qbar(std::size_t i, std::size_t j) const noexcept { return 0.5 * (q(i, j) + q(j, i)); }
};

Combined combine(std::size_t dim, std::span<const double> qxs, std::span<const double> qys, const Reference& ref,
                 const RankingRule& rule, const RankingRule* bayes) {
  if (ref.dim != dim) throw ValidationError("oracle dimension does not match the sample");
  Combined c;
  c.queries = qys.size();
  c.xs.reserve(qxs.size() + ref.xs.size());
  c.xs.insert(c.xs.end(), qxs.begin(), qxs.end());
  c.xs.insert(c.xs.end(), ref.xs.begin(), ref.xs.end());
  c.ys.reserve(qys.size() + ref.ys.size());
  c.ys.insert(c.ys.end(), qys.begin(), qys.end());
  c.ys.insert(c.ys.end(), ref.ys.begin(), ref.ys.end());
  const PointsView pts{dim, c.xs};
  c.rule = rule.prepare(pts);
  if (bayes) c.bayes = bayes->prepare(pts);
  return c;
}

// Λ over the reference: full double sum when exact, disjoint pairs otherwise.
double reference_lambda(const Combined& c, const Reference& ref) {
  const std::size_t off = c.queries;
  double total = 0.0;
  if (ref.exact) {
    for (std::size_t a = 0; a < ref.size(); ++a) {
      for (std::size_t b = 0; b < ref.size(); ++b) total += ref.weights[a] * ref.weights[b] * c.q(off + a, off + b);
    }
    return total;
  }
  const std::size_t pairs = ref.size() / 2;
  for (std::size_t k = 0; k < pairs; ++k) total += c.qbar(off + 2 * k, off + 2 * k + 1);
  return total / static_cast<double>(pairs);
}

double reference_risk(const Combined& c, const Reference& ref) {
  const std::size_t off = c.queries;
  double total = 0.0;
  if (ref.exact) {
    for (std::size_t a = 0; a < ref.size(); ++a) {
      for (std::size_t b = 0; b < ref.size(); ++b) {
        total += ref.weights[a] * ref.weights[b] * error_of(c.rule(off + a, off + b), c.ys[off + a], c.ys[off + b]);
      }
    }
    return total;
  }
  const std::size_t pairs = ref.size() / 2;
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t a = off + 2 * k;
    total += error_of(c.rule(a, a + 1), c.ys[a], c.ys[a + 1]);
  }
  return total / static_cast<double>(pairs);
}

// E q̄(z_i, Z') for query i.
double conditional_mean(const Combined& c, const Reference& ref, std::size_t i) {
  double total = 0.0;
  for (std::size_t b = 0; b < ref.size(); ++b) total += ref.weights[b] * c.qbar(i, c.queries + b);
  return total;
}

}  // namespace

double symmetric_kernel(const RankingRule& rule, const RankingRule& bayes, Observation z, Observation zp) {
  return 0.5 * (excess_kernel_q(rule, bayes, z, zp) + excess_kernel_q(rule, bayes, zp, z));
}

double population_excess(const RankingRule& rule, const RankingRule& bayes, const Oracle& oracle) {
  const Reference ref = make_reference(oracle);
  const Combined c = combine(ref.dim, {}, {}, ref, rule, &bayes);
  return reference_lambda(c, ref);
}

double h_projection(const RankingRule& rule, const RankingRule& bayes, Observation z, const Oracle& oracle) {
  const Reference ref = make_reference(oracle);
  const double y = z.y;
  const Combined c = combine(z.x.size(), z.x, std::span<const double>(&y, 1), ref, rule, &bayes);
  return conditional_mean(c, ref, 0) - reference_lambda(c, ref);
}

double degenerate_kernel(const RankingRule& rule, const RankingRule& bayes, Observation z, Observation zp,
                         const Oracle& oracle) {
  if (z.x.size() != zp.x.size()) throw ValidationError("kernel arguments have different dimensions");
  const Reference ref = make_reference(oracle);
  std::vector<double> xs(z.x.begin(), z.x.end());
  xs.insert(xs.end(), zp.x.begin(), zp.x.end());
  const std::vector<double> ys{z.y, zp.y};
  const Combined c = combine(z.x.size(), xs, ys, ref, rule, &bayes);
  const double lambda = reference_lambda(c, ref);
  const double h0 = conditional_mean(c, ref, 0) - lambda;
  const double h1 = conditional_mean(c, ref, 1) - lambda;
  return c.qbar(0, 1) - lambda - (h0 + h1);
}

KernelTable::KernelTable(std::size_t n, std::vector<double> hhat, std::vector<double> h, double lambda,
                         double lambda_n, bool exact)
    : n_(n), hhat_(std::move(hhat)), h_(std::move(h)), lambda_(lambda), lambda_n_(lambda_n), exact_(exact) {
  if (n_ < 2) throw ValidationError("kernel table needs n >= 2");
  if (hhat_.size() != n_ * n_ || h_.size() != n_) throw ValidationError("kernel table has inconsistent sizes");
  t_n_ = std::accumulate(h_.begin(), h_.end(), 0.0) / static_cast<double>(n_);
  double off_diagonal = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (j != i) row_sum += hhat_[i * n_ + j];
    }
    off_diagonal += row_sum;
  }
  w_n_ = off_diagonal / (static_cast<double>(n_) * static_cast<double>(n_ - 1));
}

KernelTable KernelTable::from_matrix(std::size_t n, std::vector<double> hhat) {
  return KernelTable(n, std::move(hhat), std::vector<double>(n, 0.0), 0.0, 0.0, true);
}

void KernelTable::release_matrix() noexcept {
  hhat_.clear();
  hhat_.shrink_to_fit();
}

KernelTable decompose(const LabeledSample& sample, const RankingRule& rule, const RankingRule& bayes,
                      const Oracle& oracle, unsigned threads) {
  const Reference ref = make_reference(oracle);
  const Combined c = combine(sample.dim(), sample.xs(), sample.ys(), ref, rule, &bayes);
  const std::size_t n = sample.size();
  const double lambda = reference_lambda(c, ref);

  std::vector<double> h(n);
  parallel_for(n, threads, [&](std::size_t i) { h[i] = conditional_mean(c, ref, i) - lambda; });

  std::vector<double> hhat(n * n);
  std::vector<std::int64_t> q_rows(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::int64_t q_sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) q_sum += static_cast<std::int64_t>(c.q(i, j));
      hhat[i * n + j] = c.qbar(i, j) - lambda - (h[i] + h[j]);
    }
    q_rows[i] = q_sum;
  });
  const std::int64_t q_total = std::accumulate(q_rows.begin(), q_rows.end(), std::int64_t{0});
  const double lambda_n = static_cast<double>(q_total) / (static_cast<double>(n) * static_cast<double>(n - 1));
  return KernelTable(n, std::move(hhat), std::move(h), lambda, lambda_n, ref.exact);
}

double pointwise_loss_l(const RankingRule& rule, Observation z, const Oracle& oracle) {
  const Reference ref = make_reference(oracle);
  const double y = z.y;
  const Combined c = combine(z.x.size(), z.x, std::span<const double>(&y, 1), ref, rule, nullptr);
  double conditional = 0.0;
  for (std::size_t b = 0; b < ref.size(); ++b) {
    conditional += ref.weights[b] * error_of(c.rule(0, 1 + b), y, ref.ys[b]);
  }
  return 2.0 * conditional - reference_risk(c, ref);
}

double empirical_process_nu(const LabeledSample& sample, const RankingRule& rule, const Oracle& oracle) {
  const Reference ref = make_reference(oracle);
  const Combined c = combine(sample.dim(), sample.xs(), sample.ys(), ref, rule, nullptr);
  const std::size_t n = sample.size();
  const double risk = reference_risk(c, ref);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double conditional = 0.0;
    for (std::size_t b = 0; b < ref.size(); ++b) {
      conditional += ref.weights[b] * error_of(c.rule(i, n + b), c.ys[i], ref.ys[b]);
    }
    total += 2.0 * conditional - risk;
  }
  return total / static_cast<double>(n) - risk;
}

double oracle_risk(const RankingRule& rule, const Oracle& oracle) {
  const Reference ref = make_reference(oracle);
  const Combined c = combine(ref.dim, {}, {}, ref, rule, nullptr);
  return reference_risk(c, ref);
}

}  // namespace urank
