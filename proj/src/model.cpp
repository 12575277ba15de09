#include "urank/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

namespace urank {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

double dot(std::span<const double> w, std::span<const double> x) {
  if (w.size() != x.size()) {
    throw ValidationError(
        fmt::format("feature dimension {} does not match weight dimension {}", x.size(), w.size()));
  }
  return std::inner_product(w.begin(), w.end(), x.begin(), 0.0);
}

double feature_at(std::span<const double> x, std::size_t f) {
  if (f >= x.size()) {
    throw ValidationError(fmt::format("feature index {} out of range for dimension {}", f, x.size()));
  }
  return x[f];
}

}  // namespace

// ---------------------------------------------------------------- samples

LabeledSample::LabeledSample(std::size_t dim, std::vector<double> xs, std::vector<double> ys)
    : dim_(dim), xs_(std::move(xs)), ys_(std::move(ys)) {
  if (dim_ == 0) throw ValidationError("feature dimension must be positive");
  if (xs_.size() != ys_.size() * dim_) {
    throw ValidationError(fmt::format("sample has {} feature values for {} labels of dimension {}",
                                      xs_.size(), ys_.size(), dim_));
  }
  if (ys_.size() < 2) throw ValidationError("sample needs at least 2 observations");
  if (!all_finite(xs_) || !all_finite(ys_)) throw ValidationError("sample contains non-finite values");
}

LabeledSample LabeledSample::from_scalar(std::vector<double> xs, std::vector<double> ys) {
  return LabeledSample(1, std::move(xs), std::move(ys));
}

// ---------------------------------------------------------------- scalar functions

ScalarFn ScalarFn::constant(double value) {
  ScalarFn fn;
  fn.kind_ = FnKind::constant;
  fn.bias_ = value;
  return fn;
}

ScalarFn ScalarFn::linear(std::vector<double> weights, double bias) {
  if (weights.empty()) throw ValidationError("linear function needs at least one weight");
  ScalarFn fn;
  fn.kind_ = FnKind::linear;
  fn.weights_ = std::move(weights);
  fn.bias_ = bias;
  return fn;
}

ScalarFn ScalarFn::logistic(std::vector<double> weights, double bias) {
  ScalarFn fn = linear(std::move(weights), bias);
  fn.kind_ = FnKind::logistic;
  return fn;
}

ScalarFn ScalarFn::step(double theta, std::size_t feature) {
  ScalarFn fn;
  fn.kind_ = FnKind::step;
  fn.theta_ = theta;
  fn.feature_ = feature;
  return fn;
}

ScalarFn ScalarFn::shift(double theta, double period, std::size_t feature) {
  if (!(period > 0.0)) throw ValidationError("shift period must be positive");
  ScalarFn fn;
  fn.kind_ = FnKind::shift;
  fn.theta_ = theta;
  fn.period_ = period;
  fn.feature_ = feature;
  return fn;
}

ScalarFn ScalarFn::custom(Callable callable, std::string name) {
  if (!callable) throw ValidationError("custom function is empty");
  ScalarFn fn;
  fn.kind_ = FnKind::custom;
  fn.name_ = std::move(name);
  fn.callable_ = std::make_shared<const Callable>(std::move(callable));
  return fn;
}

double ScalarFn::operator()(std::span<const double> x) const {
  switch (kind_) {
    case FnKind::constant:
      return bias_;
    case FnKind::linear:
      return bias_ + dot(weights_, x);
    case FnKind::logistic:
      return 1.0 / (1.0 + std::exp(-(bias_ + dot(weights_, x))));
    case FnKind::step:
      return feature_at(x, feature_) > theta_ ? 1.0 : 0.0;
    case FnKind::shift: {
      const double v = feature_at(x, feature_);
      return v > theta_ ? v - period_ : v;
    }
    case FnKind::custom:
      return (*callable_)(x);
  }
  return 0.0;
}

bool ScalarFn::monotone_scalar() const noexcept {
  switch (kind_) {
    case FnKind::constant:
    case FnKind::step:
      return true;
    case FnKind::linear:
    case FnKind::logistic:
      return weights_.size() == 1 && weights_[0] >= 0.0;
    default:
      return false;
  }
}

// ---------------------------------------------------------------- rules

RankingRule RankingRule::scorer(std::string id, ScalarFn fn) {
  RankingRule rule;
  rule.id_ = std::move(id);
  rule.fn_ = std::move(fn);
  return rule;
}

RankingRule RankingRule::table(std::string id, std::size_t dim, std::vector<std::vector<double>> keys,
                               std::vector<int> signs) {
  if (keys.empty()) throw ValidationError("table rule needs at least one key");
  if (signs.size() != keys.size() * keys.size()) {
    throw ValidationError(
        fmt::format("table rule over {} keys needs {} signs, got {}", keys.size(), keys.size() * keys.size(),
                    signs.size()));
  }
  if (std::any_of(signs.begin(), signs.end(), [](int s) { return s != 1 && s != -1; })) {
    throw ValidationError("table rule entries must be +1 or -1");
  }
  auto table = std::make_shared<Table>();
  table->dim = dim;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (keys[k].size() != dim) throw ValidationError("table rule key has wrong dimension");
    if (!table->index.emplace(keys[k], k).second) throw ValidationError("table rule keys must be distinct");
  }
  table->keys = std::move(keys);
  table->signs = std::make_shared<const std::vector<int>>(std::move(signs));
  RankingRule rule;
  rule.id_ = std::move(id);
  rule.table_ = std::move(table);
  return rule;
}

std::size_t RankingRule::key_of(std::span<const double> x) const {
  auto it = table_->index.find(std::vector<double>(x.begin(), x.end()));
  if (it == table_->index.end()) {
    throw ValidationError(fmt::format("table rule '{}' has no entry for the given feature vector", id_));
  }
  return it->second;
}

int RankingRule::operator()(std::span<const double> x, std::span<const double> xp) const {
  int s;
  if (fn_) {
    s = (*fn_)(x) >= (*fn_)(xp) ? 1 : -1;
  } else {
    s = (*table_->signs)[key_of(x) * table_->keys.size() + key_of(xp)];
  }
  return negated_ ? -s : s;
}

RankingRule RankingRule::negated(std::optional<std::string> id) const {
  RankingRule rule = *this;
  rule.negated_ = !negated_;
  rule.id_ = id ? std::move(*id) : "-" + id_;
  return rule;
}

PreparedRule RankingRule::prepare(PointsView points) const {
  PreparedRule prepared;
  prepared.negated_ = negated_;
  const std::size_t n = points.size();
  if (fn_) {
    prepared.scores_.resize(n);
    for (std::size_t i = 0; i < n; ++i) prepared.scores_[i] = (*fn_)(points.x(i));
  } else {
    if (points.dim != table_->dim) throw ValidationError("table rule dimension does not match points");
    prepared.keys_.resize(n);
    for (std::size_t i = 0; i < n; ++i) prepared.keys_[i] = key_of(points.x(i));
    prepared.table_ = table_->signs;
    prepared.width_ = table_->keys.size();
  }
  return prepared;
}

const char* to_string(ThresholdKind kind) noexcept {
  return kind == ThresholdKind::step ? "step" : "shift";
}

ThresholdKind threshold_kind_from_string(const std::string& name) {
  if (name == "step") return ThresholdKind::step;
  if (name == "shift") return ThresholdKind::shift;
  throw ValidationError(fmt::format("unknown threshold kind '{}' (expected step or shift)", name));
}

RuleClass::RuleClass(std::vector<RankingRule> rules, std::optional<int> vc_dim)
    : rules_(std::move(rules)), vc_dim_(vc_dim) {
  if (rules_.empty()) throw ValidationError("rule class must not be empty");
  if (vc_dim_ && *vc_dim_ <= 0) throw ValidationError("VC dimension must be positive");
}

RuleClass RuleClass::threshold_grid(ThresholdKind kind, std::span<const double> thetas, double period,
                                    std::size_t feature) {
  std::vector<RankingRule> rules;
  rules.reserve(thetas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    ScalarFn fn = kind == ThresholdKind::step ? ScalarFn::step(thetas[k], feature)
                                              : ScalarFn::shift(thetas[k], period, feature);
    rules.push_back(RankingRule::scorer(fmt::format("{}:{:04d}", to_string(kind), k), std::move(fn)));
  }
  return RuleClass(std::move(rules), 1);
}

RuleClass RuleClass::with(RankingRule rule) const {
  auto rules = rules_;
  rules.push_back(std::move(rule));
  return RuleClass(std::move(rules), vc_dim_);
}

// ---------------------------------------------------------------- generative models

GenerativeModel GenerativeModel::binary_eta(ScalarFn eta, UniformBox x, double density_bound) {
  if (!(x.hi > x.lo) || x.dim == 0) throw ValidationError("feature box must have lo < hi and dim >= 1");
  if (!(density_bound > 0.0)) throw ValidationError("density bound must be positive");
  return GenerativeModel(BinaryEta{std::move(eta), x, density_bound});
}

GenerativeModel GenerativeModel::gaussian(ScalarFn mean, ScalarFn sigma, UniformBox x) {
  if (!(x.hi > x.lo) || x.dim == 0) throw ValidationError("feature box must have lo < hi and dim >= 1");
  return GenerativeModel(GaussianRegression{std::move(mean), std::move(sigma), x});
}

const UniformBox& GenerativeModel::box() const noexcept {
  return std::visit([](const auto& s) -> const UniformBox& { return s.x; }, spec_);
}

const ScalarFn& GenerativeModel::bayes_scorer() const noexcept {
  if (const auto* b = std::get_if<BinaryEta>(&spec_)) return b->eta;
  return std::get<GaussianRegression>(spec_).mean;
}

double GenerativeModel::draw(CounterRng& rng, std::span<double> x) const {
  const UniformBox& b = box();
  for (std::size_t k = 0; k < b.dim; ++k) x[k] = rng.uniform(b.lo, b.hi);
  if (const auto* be = std::get_if<BinaryEta>(&spec_)) {
    const double eta = be->eta(x);
    if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError(fmt::format("eta(x) = {} outside [0, 1]", eta));
    return rng.uniform() < eta ? 1.0 : -1.0;
  }
  const auto& g = std::get<GaussianRegression>(spec_);
  const double sd = g.sigma(x);
  if (!(sd >= 0.0)) throw ValidationError(fmt::format("sigma(x) = {} is negative", sd));
  return g.mean(x) + sd * rng.normal();
}

double GenerativeModel::prob_greater(std::span<const double> x, std::span<const double> xp) const {
  if (const auto* be = std::get_if<BinaryEta>(&spec_)) return be->eta(x) * (1.0 - be->eta(xp));
  const auto& g = std::get<GaussianRegression>(spec_);
  const double diff = g.mean(x) - g.mean(xp);
  const double sx = g.sigma(x);
  const double sxp = g.sigma(xp);
  const double var = sx * sx + sxp * sxp;
  if (var == 0.0) return diff > 0.0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-diff / std::sqrt(2.0 * var));
}

// ---------------------------------------------------------------- discrete distributions

DiscreteDistribution::DiscreteDistribution(std::size_t dim, std::vector<double> xs, std::vector<double> ys,
                                           std::vector<double> probs)
    : dim_(dim), xs_(std::move(xs)), ys_(std::move(ys)), probs_(std::move(probs)) {
  if (dim_ == 0) throw ValidationError("feature dimension must be positive");
  if (ys_.empty()) throw ValidationError("distribution needs at least one atom");
  if (xs_.size() != ys_.size() * dim_ || probs_.size() != ys_.size()) {
    throw ValidationError("distribution atoms, labels, and probabilities have inconsistent sizes");
  }
  if (!all_finite(xs_) || !all_finite(ys_)) throw ValidationError("distribution contains non-finite values");
  if (std::any_of(probs_.begin(), probs_.end(), [](double p) { return !(p >= 0.0); })) {
    throw ValidationError("atom probabilities must be nonnegative");
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError(fmt::format("atom probabilities sum to {:.17g}, expected 1", total));
  }
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
}

std::optional<std::size_t> DiscreteDistribution::find_atom(std::span<const double> x, double y) const {
  for (std::size_t a = 0; a < size(); ++a) {
    if (ys_[a] == y && std::equal(x.begin(), x.end(), this->x(a).begin(), this->x(a).end())) return a;
  }
  return std::nullopt;
}

double DiscreteDistribution::prob_labels_differ() const {
  double same = 0.0;
  for (std::size_t a = 0; a < size(); ++a) {
    for (std::size_t b = 0; b < size(); ++b) {
      if (ys_[a] == ys_[b]) same += probs_[a] * probs_[b];
    }
  }
  return 1.0 - same;
}

// ---------------------------------------------------------------- operations

LabeledSample sample(const GenerativeModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("sample size must be at least 2");
  const std::size_t d = model.dim();
  std::vector<double> xs(n * d);
  std::vector<double> ys(n);
  CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) ys[i] = model.draw(rng, std::span<double>(xs).subspan(i * d, d));
  return LabeledSample(d, std::move(xs), std::move(ys));
}

LabeledSample sample(const DiscreteDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("sample size must be at least 2");
  const std::size_t d = dist.dim();
  std::vector<double> xs;
  xs.reserve(n * d);
  std::vector<double> ys(n);
  CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * dist.cdf_.back();
    auto a = static_cast<std::size_t>(std::upper_bound(dist.cdf_.begin(), dist.cdf_.end(), u) - dist.cdf_.begin());
    a = std::min(a, dist.size() - 1);
    while (dist.prob(a) == 0.0 && a > 0) --a;
    const auto x = dist.x(a);
    xs.insert(xs.end(), x.begin(), x.end());
    ys[i] = dist.y(a);
  }
  return LabeledSample(d, std::move(xs), std::move(ys));
}

RankingRule bayes_rule(const GenerativeModel& model) {
  return RankingRule::scorer("bayes", model.bayes_scorer());
}

RankingRule bayes_rule(const DiscreteDistribution& dist) {
  std::map<std::vector<double>, std::size_t> index;
  std::vector<std::vector<double>> keys;
  std::vector<std::size_t> key_of_atom(dist.size());
  for (std::size_t a = 0; a < dist.size(); ++a) {
    std::vector<double> key(dist.x(a).begin(), dist.x(a).end());
    auto [it, inserted] = index.emplace(key, keys.size());
    if (inserted) keys.push_back(std::move(key));
    key_of_atom[a] = it->second;
  }
  const std::size_t m = keys.size();
  // advantage[u][v] = P{Y > Y', X = u, X' = v} - P{Y < Y', X = u, X' = v}
  std::vector<double> advantage(m * m, 0.0);
  for (std::size_t a = 0; a < dist.size(); ++a) {
    for (std::size_t b = 0; b < dist.size(); ++b) {
      const double w = dist.prob(a) * dist.prob(b);
      const double sgn = dist.y(a) > dist.y(b) ? 1.0 : (dist.y(a) < dist.y(b) ? -1.0 : 0.0);
      advantage[key_of_atom[a] * m + key_of_atom[b]] += w * sgn;
    }
  }
  std::vector<int> signs(m * m, 1);
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t v = u + 1; v < m; ++v) {
      const double adv = advantage[u * m + v];
      signs[u * m + v] = adv >= 0.0 ? 1 : -1;
      signs[v * m + u] = adv <= 0.0 ? 1 : -1;
    }
  }
  return RankingRule::table("bayes", dist.dim(), std::move(keys), std::move(signs));
}

double true_risk(const RankingRule& rule, const DiscreteDistribution& dist) {
  const PreparedRule r = rule.prepare(dist.points());
  double risk = 0.0;
  for (std::size_t a = 0; a < dist.size(); ++a) {
    for (std::size_t b = 0; b < dist.size(); ++b) {
      const int s = r(a, b);
      const bool error = s > 0 ? dist.y(a) < dist.y(b) : dist.y(a) > dist.y(b);
      if (error) risk += dist.prob(a) * dist.prob(b);
    }
  }
  return risk;
}

McEstimate mc_risk(const RankingRule& rule, const GenerativeModel& model, std::size_t reps, std::uint64_t seed) {
  if (reps < 2) throw ValidationError("Monte-Carlo risk needs at least 2 replicates");
  const std::size_t d = model.dim();
  std::vector<double> x(d);
  std::vector<double> xp(d);
  CounterRng rng(seed);
  std::size_t errors = 0;
  for (std::size_t k = 0; k < reps; ++k) {
    const double y = model.draw(rng, x);
    const double yp = model.draw(rng, xp);
    const int s = rule(x, xp);
    if (s > 0 ? y < yp : y > yp) ++errors;
  }
  const double n = static_cast<double>(reps);
  const double mean = static_cast<double>(errors) / n;
  const double var = mean * (1.0 - mean) * n / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

// ---------------------------------------------------------------- quadrature oracles

namespace {

using Gauss = boost::math::quadrature::gauss<double, 20>;
constexpr int kPanels = 8;

template <typename F>
double integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const double width = (b - a) / kPanels;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = a + k * width;
    total += Gauss::integrate(f, lo, k + 1 == kPanels ? b : lo + width);
  }
  return total;
}

struct ScalarModel {
  const GenerativeModel& model;

  double greater(double x, double xp) const {
    return model.prob_greater(std::span<const double>(&x, 1), std::span<const double>(&xp, 1));
  }
  double less(double x, double xp) const { return greater(xp, x); }

  // ∫_{a}^{b} ∫_{c}^{d} f(x, x') dx' dx
  template <typename F>
  double rect(F&& f, double a, double b, double c, double d) const {
    return integrate([&](double x) { return integrate([&](double xp) { return f(x, xp); }, c, d); }, a, b);
  }

  // ∫_{a}^{b} ∫_{a}^{x} f(x, x') dx' dx
  template <typename F>
  double lower_triangle(F&& f, double a, double b) const {
    return integrate([&](double x) { return integrate([&](double xp) { return f(x, xp); }, a, x); }, a, b);
  }
};

const UniformBox& checked_scalar_box(const GenerativeModel& model) {
  const UniformBox& box = model.box();
  if (box.dim != 1) throw ValidationError("quadrature risk oracle requires a scalar feature");
  if (!model.bayes_scorer().monotone_scalar()) {
    throw ValidationError("quadrature risk oracle requires a non-decreasing Bayes scorer");
  }
  return box;
}

}  // namespace

double bayes_risk(const GenerativeModel& model) {
  const UniformBox& box = checked_scalar_box(model);
  const ScalarModel sm{model};
  const double density = 1.0 / (box.hi - box.lo);
  auto less = [&](double x, double xp) { return sm.less(x, xp); };
  return 2.0 * density * density * sm.lower_triangle(less, box.lo, box.hi);
}

double threshold_risk(const GenerativeModel& model, ThresholdKind kind, double theta) {
  const UniformBox& box = checked_scalar_box(model);
  const ScalarModel sm{model};
  const double lo = box.lo;
  const double hi = box.hi;
  const double t = std::clamp(theta, lo, hi);
  const double density2 = 1.0 / ((hi - lo) * (hi - lo));
  auto less = [&](double x, double xp) { return sm.less(x, xp); };
  auto greater = [&](double x, double xp) { return sm.greater(x, xp); };
  if (kind == ThresholdKind::step) {
    // Same-side pairs are score ties (ranked +1 both ways); cross pairs put
    // the block above t first.
    const double same = sm.rect(less, lo, t, lo, t) + sm.rect(less, t, hi, t, hi);
    const double cross = 2.0 * sm.rect(less, t, hi, lo, t);
    return density2 * (same + cross);
  }
  // Shift: each block keeps the Bayes order; the block above t goes last.
  const double within = 2.0 * (sm.lower_triangle(less, lo, t) + sm.lower_triangle(less, t, hi));
  const double cross = 2.0 * sm.rect(greater, t, hi, lo, t);
  return density2 * (within + cross);
}

}  // namespace urank
