#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "urank/rng.hpp"

namespace urank {

/// Rejected input: bad sizes, out-of-range parameters, malformed configs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Read-only view over a row-major block of feature vectors.
struct PointsView {
  std::size_t dim = 1;
  std::span<const double> xs;

  std::size_t size() const noexcept { return dim == 0 ? 0 : xs.size() / dim; }
  std::span<const double> x(std::size_t i) const noexcept { return xs.subspan(i * dim, dim); }
};

/// n labelled observations (x_i, y_i). Requires n >= 2 and finite values.
class LabeledSample {
 public:
  LabeledSample(std::size_t dim, std::vector<double> xs, std::vector<double> ys);

  /// Scalar-feature convenience constructor.
  static LabeledSample from_scalar(std::vector<double> xs, std::vector<double> ys);

  std::size_t size() const noexcept { return ys_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> x(std::size_t i) const noexcept { return {xs_.data() + i * dim_, dim_}; }
  double y(std::size_t i) const noexcept { return ys_[i]; }
  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ys() const noexcept { return ys_; }
  PointsView points() const noexcept { return {dim_, xs_}; }

  bool operator==(const LabeledSample&) const = default;

 private:
  std::size_t dim_;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

enum class FnKind { constant, linear, logistic, step, shift, custom };

/// Real-valued function of a feature vector. Closed set of parametric
/// forms (serializable) plus an opaque custom callable.
///
///   constant  c
///   linear    bias + w·x
///   logistic  1 / (1 + exp(-(bias + w·x)))
///   step      1[x_f > theta]
///   shift     x_f - period·1[x_f > theta]   (moves the block above theta
///                                            below everything else when
///                                            period exceeds the range of x_f)
class ScalarFn {
 public:
  using Callable = std::function<double(std::span<const double>)>;

  static ScalarFn constant(double value);
  static ScalarFn linear(std::vector<double> weights, double bias = 0.0);
  static ScalarFn logistic(std::vector<double> weights, double bias = 0.0);
  static ScalarFn step(double theta, std::size_t feature = 0);
  static ScalarFn shift(double theta, double period, std::size_t feature = 0);
  static ScalarFn custom(Callable fn, std::string name);

  double operator()(std::span<const double> x) const;

  FnKind kind() const noexcept { return kind_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  double value() const noexcept { return bias_; }
  double theta() const noexcept { return theta_; }
  double period() const noexcept { return period_; }
  std::size_t feature() const noexcept { return feature_; }
  const std::string& name() const noexcept { return name_; }

  /// True when the function is non-decreasing in x_0 for scalar inputs
  /// (constant, linear/logistic with w_0 >= 0 and dim 1).
  bool monotone_scalar() const noexcept;

 private:
  ScalarFn() = default;

  FnKind kind_ = FnKind::constant;
  std::vector<double> weights_;
  double bias_ = 0.0;
  double theta_ = 0.0;
  double period_ = 0.0;
  std::size_t feature_ = 0;
  std::string name_;
  std::shared_ptr<const Callable> callable_;
};

class RankingRule;

/// A rule bound to a fixed point set; evaluates r(x_i, x_j) by index.
class PreparedRule {
 public:
  int operator()(std::size_t i, std::size_t j) const noexcept {
    int s;
    if (table_) {
      s = (*table_)[keys_[i] * width_ + keys_[j]];
    } else {
      s = scores_[i] >= scores_[j] ? 1 : -1;
    }
    return negated_ ? -s : s;
  }

  std::size_t size() const noexcept { return table_ ? keys_.size() : scores_.size(); }
  bool has_scores() const noexcept { return !table_; }
  std::span<const double> scores() const noexcept { return scores_; }
  bool negated() const noexcept { return negated_; }

 private:
  friend class RankingRule;

  std::vector<double> scores_;
  std::vector<std::size_t> keys_;
  std::shared_ptr<const std::vector<int>> table_;
  std::size_t width_ = 0;
  bool negated_ = false;
};

/// r : X × X → {-1, +1}; +1 ranks the first argument higher.
///
/// Scorer rules evaluate sign(s(x) - s(x')) with sign(0) = +1. Table rules
/// hold explicit signs over a finite set of feature vectors and reject
/// anything outside it.
class RankingRule {
 public:
  static RankingRule scorer(std::string id, ScalarFn fn);
  /// `signs` is row-major over `keys` × `keys`; every entry must be ±1.
  static RankingRule table(std::string id, std::size_t dim, std::vector<std::vector<double>> keys,
                           std::vector<int> signs);

  int operator()(std::span<const double> x, std::span<const double> xp) const;

  /// The rule -r. Default id is "-" + id().
  RankingRule negated(std::optional<std::string> id = std::nullopt) const;

  PreparedRule prepare(PointsView points) const;

  const std::string& id() const noexcept { return id_; }
  bool is_scorer() const noexcept { return fn_.has_value(); }
  bool is_negated() const noexcept { return negated_; }
  const ScalarFn* scorer_fn() const noexcept { return fn_ ? &*fn_ : nullptr; }

  struct Table {
    std::size_t dim = 1;
    std::vector<std::vector<double>> keys;
    std::map<std::vector<double>, std::size_t> index;
    std::shared_ptr<const std::vector<int>> signs;
  };
  const Table* table_data() const noexcept { return table_.get(); }

 private:
  RankingRule() = default;
  std::size_t key_of(std::span<const double> x) const;

  std::string id_;
  std::optional<ScalarFn> fn_;
  std::shared_ptr<const Table> table_;
  bool negated_ = false;
};

enum class ThresholdKind { step, shift };

const char* to_string(ThresholdKind kind) noexcept;
ThresholdKind threshold_kind_from_string(const std::string& name);

/// Finite, deterministic, non-empty collection of rules, with an optional
/// VC dimension.
class RuleClass {
 public:
  explicit RuleClass(std::vector<RankingRule> rules, std::optional<int> vc_dim = std::nullopt);

  /// One scorer rule per theta, ids "<kind>:<index>" zero-padded so that
  /// lexicographic id order equals grid order.
  static RuleClass threshold_grid(ThresholdKind kind, std::span<const double> thetas,
                                  double period = 0.0, std::size_t feature = 0);

  RuleClass with(RankingRule rule) const;

  const std::vector<RankingRule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  std::optional<int> vc_dim() const noexcept { return vc_dim_; }
  const RankingRule& operator[](std::size_t i) const { return rules_.at(i); }

 private:
  std::vector<RankingRule> rules_;
  std::optional<int> vc_dim_;
};

/// Features drawn uniformly on [lo, hi]^dim.
struct UniformBox {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t dim = 1;
};

/// Y ∈ {-1, +1} with P{Y = 1 | X = x} = eta(x).
struct BinaryEta {
  ScalarFn eta;
  UniformBox x;
  double density_bound = 1.0;
};

/// Y = m(X) + sigma(X)·N, N standard normal independent of X.
struct GaussianRegression {
  ScalarFn mean;
  ScalarFn sigma;
  UniformBox x;
};

class GenerativeModel {
 public:
  using Spec = std::variant<BinaryEta, GaussianRegression>;

  static GenerativeModel binary_eta(ScalarFn eta, UniformBox x = {}, double density_bound = 1.0);
  static GenerativeModel gaussian(ScalarFn mean, ScalarFn sigma, UniformBox x = {});

  const Spec& spec() const noexcept { return spec_; }
  const UniformBox& box() const noexcept;
  std::size_t dim() const noexcept { return box().dim; }

  /// Draws one (x, y); x is written into `x` (size dim()).
  double draw(CounterRng& rng, std::span<double> x) const;

  /// P{Y > Y' | X = x, X' = xp} for independent labels.
  double prob_greater(std::span<const double> x, std::span<const double> xp) const;

  /// The scorer the Bayes rule ranks by: eta or m.
  const ScalarFn& bayes_scorer() const noexcept;

 private:
  explicit GenerativeModel(Spec spec) : spec_(std::move(spec)) {}
  Spec spec_;
};

/// Finite distribution over atoms (x_a, y_a) with probabilities p_a.
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::size_t dim, std::vector<double> xs, std::vector<double> ys,
                       std::vector<double> probs);

  std::size_t size() const noexcept { return ys_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> x(std::size_t a) const noexcept { return {xs_.data() + a * dim_, dim_}; }
  double y(std::size_t a) const noexcept { return ys_[a]; }
  double prob(std::size_t a) const noexcept { return probs_[a]; }
  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ys() const noexcept { return ys_; }
  std::span<const double> probs() const noexcept { return probs_; }
  PointsView points() const noexcept { return {dim_, xs_}; }

  /// Atom whose (x, y) equals the given point, if any.
  std::optional<std::size_t> find_atom(std::span<const double> x, double y) const;

  /// P{Y != Y'} for independent draws.
  double prob_labels_differ() const;

 private:
  std::size_t dim_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> probs_;
  std::vector<double> cdf_;

  friend LabeledSample sample(const DiscreteDistribution&, std::size_t, std::uint64_t);
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// n i.i.d. draws; a pure function of (model, n, seed).
LabeledSample sample(const GenerativeModel& model, std::size_t n, std::uint64_t seed);
LabeledSample sample(const DiscreteDistribution& dist, std::size_t n, std::uint64_t seed);

/// Scorer rule ranking by eta (binary) or m (regression).
RankingRule bayes_rule(const GenerativeModel& model);

/// Pairwise-optimal table rule over the distinct feature vectors of the
/// support: +1 where P{Y > Y' | x, x'} >= P{Y < Y' | x, x'}.
RankingRule bayes_rule(const DiscreteDistribution& dist);

/// Exact L(r) = Σ_{a,b} p_a p_b 1[(y_a - y_b)·r(x_a, x_b) < 0].
double true_risk(const RankingRule& rule, const DiscreteDistribution& dist);

/// Monte-Carlo L(r) from `reps` independent pairs, with standard error.
McEstimate mc_risk(const RankingRule& rule, const GenerativeModel& model, std::size_t reps,
                   std::uint64_t seed);

/// L* for a scalar-feature model whose Bayes scorer is non-decreasing,
/// by Gauss-Legendre quadrature.
double bayes_risk(const GenerativeModel& model);

/// L(r) for the threshold scorer of the given kind at theta (scalar
/// feature, non-decreasing Bayes scorer), by quadrature. For `shift`, the
/// period is taken large enough to separate the two blocks.
double threshold_risk(const GenerativeModel& model, ThresholdKind kind, double theta);

}  // namespace urank
