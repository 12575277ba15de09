#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "urank/model.hpp"
#include "urank/risk.hpp"

namespace urank {

struct ErmResult {
  RankingRule minimizer;
  double min_risk = 0.0;
  std::uint64_t min_error_pairs = 0;
  std::optional<std::vector<std::pair<std::string, double>>> per_rule_risks;
  /// Every rule id achieving min_risk, in id order (includes the minimizer).
  std::vector<std::string> ties;
};

/// L_n of every rule in the class; the minimizer is the co-minimizer with
/// the lexicographically smallest id.
ErmResult erm_exhaustive(const LabeledSample& sample, const RuleClass& rules, bool keep_per_rule = false,
                         unsigned threads = 1);

/// Continuous one-parameter threshold family over a scalar feature.
/// `period` is only used by the shift kind and must exceed the range of
/// the feature on any sample the family is applied to.
struct ThresholdFamily {
  ThresholdKind kind = ThresholdKind::shift;
  double period = 0.0;
};

/// Threshold of each θ-cell for the sorted distinct feature values
/// v_1 < ... < v_m: -inf, the midpoints (v_k + v_{k+1}) / 2, +inf.
/// Rejects non-scalar samples.
std::vector<double> cell_thresholds(const LabeledSample& sample);

/// The finite class the family induces on this sample: one rule per θ-cell,
/// ids "<kind>:cell:<k>" zero-padded to a common width.
RuleClass induced_class(const LabeledSample& sample, const ThresholdFamily& family);

/// Exact ERM over the family by a single sweep across the θ-cells, keeping
/// the pair-error count current with Fenwick trees. Agrees with
/// erm_exhaustive on induced_class(sample, family).
ErmResult erm_threshold_scan(const LabeledSample& sample, const ThresholdFamily& family,
                             bool keep_per_rule = false);

/// Error counts of every θ-cell, in cell order.
std::vector<std::uint64_t> threshold_scan_errors(const LabeledSample& sample, const ThresholdFamily& family);

}  // namespace urank
