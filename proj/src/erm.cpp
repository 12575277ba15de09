#include "urank/erm.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "urank/detail/fenwick.hpp"
#include "urank/parallel.hpp"

namespace urank {

namespace {

struct RuleScore {
  std::uint64_t errors;
  const std::string* id;
  std::size_t index;
};

bool better(const RuleScore& a, const RuleScore& b) {
  if (a.errors != b.errors) return a.errors < b.errors;
  return *a.id < *b.id;
}

ErmResult select(const std::vector<RuleScore>& scores, const std::vector<RankingRule>& rules, std::uint64_t pairs,
                 bool keep_per_rule) {
  const auto best = std::min_element(scores.begin(), scores.end(), better);
  ErmResult result{rules[best->index],
                   static_cast<double>(best->errors) / static_cast<double>(pairs),
                   best->errors,
                   std::nullopt,
                   {}};
  for (const auto& s : scores) {
    if (s.errors == best->errors) result.ties.push_back(*s.id);
  }
  std::sort(result.ties.begin(), result.ties.end());
  if (keep_per_rule) {
    result.per_rule_risks.emplace();
    for (const auto& s : scores) {
      result.per_rule_risks->emplace_back(*s.id, static_cast<double>(s.errors) / static_cast<double>(pairs));
    }
  }
  return result;
}

void require_scalar(const LabeledSample& sample) {
  if (sample.dim() != 1) {
    throw ValidationError(fmt::format("threshold scan needs a scalar feature, sample has dimension {}", sample.dim()));
  }
}

// Items grouped by equal feature value, groups in increasing order, with
// labels replaced by dense ranks.
struct SortedSample {
  std::vector<std::size_t> label_rank;
  std::size_t label_count = 0;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> values;  // one per group
};

SortedSample sort_sample(const LabeledSample& sample) {
  const std::size_t n = sample.size();
  SortedSample s;
  std::vector<double> labels(sample.ys().begin(), sample.ys().end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  s.label_count = labels.size();
  s.label_rank.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.label_rank[i] =
        static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), sample.y(i)) - labels.begin());
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sample.x(a)[0] < sample.x(b)[0]; });
  for (std::size_t k = 0; k < n; ++k) {
    const double v = sample.x(order[k])[0];
    if (s.values.empty() || v != s.values.back()) {
      s.values.push_back(v);
      s.groups.emplace_back();
    }
    s.groups.back().push_back(order[k]);
  }
  return s;
}

std::int64_t choose2(std::int64_t k) { return k * (k - 1) / 2; }

// Unordered pairs inside a group with distinct labels.
std::int64_t tied_distinct(const std::vector<std::size_t>& group, const SortedSample& s) {
  std::vector<std::int64_t> counts;
  std::int64_t same = 0;
  std::vector<std::size_t> ranks;
  ranks.reserve(group.size());
  for (auto i : group) ranks.push_back(s.label_rank[i]);
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t a = 0; a < ranks.size();) {
    std::size_t b = a;
    while (b < ranks.size() && ranks[b] == ranks[a]) ++b;
    same += choose2(static_cast<std::int64_t>(b - a));
    a = b;
  }
  return choose2(static_cast<std::int64_t>(group.size())) - same;
}

// A block of items (above or below the threshold) with label statistics.
struct Block {
  explicit Block(std::size_t labels) : counts(labels, 0), tree(labels) {}

  void add(std::size_t rank) {
    tree.add(rank, 1);
    ++counts[rank];
    ++size;
  }
  void remove(std::size_t rank) {
    tree.add(rank, -1);
    --counts[rank];
    --size;
  }
  std::int64_t below(std::size_t rank) const { return tree.prefix(rank); }
  std::int64_t above(std::size_t rank) const { return size - tree.prefix(rank + 1); }

  std::vector<std::int64_t> counts;
  detail::Fenwick tree;
  std::int64_t size = 0;
};

std::vector<std::uint64_t> scan_step(const SortedSample& s, std::size_t n) {
  Block above(s.label_count);
  Block below(s.label_count);
  for (std::size_t i = 0; i < n; ++i) above.add(s.label_rank[i]);
  // Score ties inside a block err in exactly one order when labels differ;
  // a cross pair errs in both orders when the upper item has the smaller label.
  std::int64_t tied_above = choose2(static_cast<std::int64_t>(n));
  for (auto c : above.counts) tied_above -= choose2(c);
  std::int64_t tied_below = 0;
  std::int64_t cross = 0;
  std::vector<std::uint64_t> errors;
  errors.reserve(s.groups.size() + 1);
  errors.push_back(static_cast<std::uint64_t>(2 * cross + tied_above + tied_below));
  for (const auto& group : s.groups) {
    for (auto g : group) {
      const std::size_t r = s.label_rank[g];
      above.remove(r);
      tied_above -= above.size - above.counts[r];
      cross -= below.above(r);
      cross += above.below(r);
      tied_below += below.size - below.counts[r];
      below.add(r);
    }
    errors.push_back(static_cast<std::uint64_t>(2 * cross + tied_above + tied_below));
  }
  return errors;
}

std::vector<std::uint64_t> scan_shift(const SortedSample& s, std::size_t n) {
  // Each block ranks by feature value (value ties are score ties); the
  // lower block is ranked above the upper block.
  Block upper(s.label_count);
  Block lower(s.label_count);
  std::int64_t within_upper = 0;
  {
    Block seen(s.label_count);
    for (const auto& group : s.groups) {
      for (auto g : group) within_upper += 2 * seen.above(s.label_rank[g]);
      within_upper += tied_distinct(group, s);
      for (auto g : group) seen.add(s.label_rank[g]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) upper.add(s.label_rank[i]);
  std::int64_t within_lower = 0;
  std::int64_t cross = 0;
  std::vector<std::uint64_t> errors;
  errors.reserve(s.groups.size() + 1);
  errors.push_back(static_cast<std::uint64_t>(2 * cross + within_lower + within_upper));
  for (const auto& group : s.groups) {
    for (auto g : group) upper.remove(s.label_rank[g]);
    for (auto g : group) {
      const std::size_t r = s.label_rank[g];
      within_lower += 2 * lower.above(r);
      within_upper -= 2 * upper.below(r);
      cross -= lower.below(r);
      cross += upper.above(r);
    }
    const std::int64_t ties = tied_distinct(group, s);
    within_lower += ties;
    within_upper -= ties;
    for (auto g : group) lower.add(s.label_rank[g]);
    errors.push_back(static_cast<std::uint64_t>(2 * cross + within_lower + within_upper));
  }
  return errors;
}

std::string cell_id(ThresholdKind kind, std::size_t k, std::size_t cells) {
  const int width = static_cast<int>(fmt::format("{}", cells - 1).size());
  return fmt::format("{}:cell:{:0{}d}", to_string(kind), k, width);
}

RankingRule cell_rule(const ThresholdFamily& family, double theta, std::string id) {
  ScalarFn fn = family.kind == ThresholdKind::step ? ScalarFn::step(theta) : ScalarFn::shift(theta, family.period);
  return RankingRule::scorer(std::move(id), std::move(fn));
}

void check_period(const LabeledSample& sample, const ThresholdFamily& family) {
  if (family.kind != ThresholdKind::shift) return;
  const auto [lo, hi] = std::minmax_element(sample.xs().begin(), sample.xs().end());
  if (!(family.period > *hi - *lo)) {
    throw ValidationError(
        fmt::format("shift period {} must exceed the feature range {}", family.period, *hi - *lo));
  }
}

}  // namespace

ErmResult erm_exhaustive(const LabeledSample& sample, const RuleClass& rules, bool keep_per_rule, unsigned threads) {
  const auto& list = rules.rules();
  std::vector<RuleScore> scores(list.size());
  parallel_for(list.size(), threads, [&](std::size_t k) {
    scores[k] = {empirical_risk(sample, list[k]).error_pair_count, &list[k].id(), k};
  });
  const std::uint64_t pairs = static_cast<std::uint64_t>(sample.size()) * (sample.size() - 1);
  return select(scores, list, pairs, keep_per_rule);
}

std::vector<double> cell_thresholds(const LabeledSample& sample) {
  require_scalar(sample);
  std::vector<double> values(sample.xs().begin(), sample.xs().end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> thetas;
  thetas.reserve(values.size() + 1);
  thetas.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    double mid = values[k] + (values[k + 1] - values[k]) / 2.0;
    if (!(mid < values[k + 1])) mid = values[k];
    thetas.push_back(mid);
  }
  thetas.push_back(std::numeric_limits<double>::infinity());
  return thetas;
}

RuleClass induced_class(const LabeledSample& sample, const ThresholdFamily& family) {
  check_period(sample, family);
  const auto thetas = cell_thresholds(sample);
  std::vector<RankingRule> rules;
  rules.reserve(thetas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    rules.push_back(cell_rule(family, thetas[k], cell_id(family.kind, k, thetas.size())));
  }
  return RuleClass(std::move(rules), 1);
}

std::vector<std::uint64_t> threshold_scan_errors(const LabeledSample& sample, const ThresholdFamily& family) {
  require_scalar(sample);
  check_period(sample, family);
  const SortedSample sorted = sort_sample(sample);
  return family.kind == ThresholdKind::step ? scan_step(sorted, sample.size()) : scan_shift(sorted, sample.size());
}

ErmResult erm_threshold_scan(const LabeledSample& sample, const ThresholdFamily& family, bool keep_per_rule) {
  const auto errors = threshold_scan_errors(sample, family);
  const auto thetas = cell_thresholds(sample);
  const std::size_t cells = thetas.size();
  const std::uint64_t pairs = static_cast<std::uint64_t>(sample.size()) * (sample.size() - 1);
  const auto best = static_cast<std::size_t>(std::min_element(errors.begin(), errors.end()) - errors.begin());
  ErmResult result{cell_rule(family, thetas[best], cell_id(family.kind, best, cells)),
                   static_cast<double>(errors[best]) / static_cast<double>(pairs),
                   errors[best],
                   std::nullopt,
                   {}};
  for (std::size_t k = 0; k < cells; ++k) {
    if (errors[k] == errors[best]) result.ties.push_back(cell_id(family.kind, k, cells));
  }
  if (keep_per_rule) {
    result.per_rule_risks.emplace();
    for (std::size_t k = 0; k < cells; ++k) {
      result.per_rule_risks->emplace_back(cell_id(family.kind, k, cells),
                                          static_cast<double>(errors[k]) / static_cast<double>(pairs));
    }
  }
  return result;
}

}  // namespace urank
