#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "urank/complexity.hpp"
#include "urank/erm.hpp"
#include "urank/experiments.hpp"
#include "urank/hoeffding.hpp"
#include "urank/model.hpp"
#include "urank/risk.hpp"

namespace urank::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Unreadable or unwritable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- files ---------------------------------------------------------------

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Parses a JSON document; syntax errors are reported as ValidationError.
json parse_json(const std::string& text, const std::string& what);
json read_json(const std::filesystem::path& path);

/// Rejects documents without a supported integer `schema_version`.
void check_schema(const json& doc, const std::string& what);

std::string sha256_hex(const std::string& bytes);

/// Canonical text of a JSON document: 2-space indent, trailing newline.
std::string dump(const json& doc);

// ---- numbers ---------------------------------------------------------------

/// Finite values as numbers, infinities as the strings "inf" / "-inf".
json number(double value);
double to_number(const json& value, const std::string& what);

/// `{:.17g}`.
std::string format_double(double value);

// ---- samples ---------------------------------------------------------------

/// CSV with header x0,...,x{d-1},y.
LabeledSample parse_sample_csv(const std::string& text);
std::string sample_csv(const LabeledSample& sample);
LabeledSample read_sample_csv(const std::filesystem::path& path);
void write_sample_csv(const std::filesystem::path& path, const LabeledSample& sample);

// ---- domain objects ----------------------------------------------------------

json to_json(const ScalarFn& fn);
ScalarFn scalar_fn_from_json(const json& doc);

json to_json(const RankingRule& rule);
/// `{"type": "bayes"}` resolves to `bayes`, which must then be given.
RankingRule rule_from_json(const json& doc, const RankingRule* bayes = nullptr);

/// A class document: a materialized list (`rules`, `threshold_grid`,
/// `include_bayes`) or a continuous threshold `family`, not both.
struct ClassSpec {
  std::optional<RuleClass> rules;
  std::optional<ThresholdFamily> family;
};
ClassSpec class_from_json(const json& doc, const RankingRule* bayes = nullptr);

json to_json(const GenerativeModel& model);
GenerativeModel model_from_json(const json& doc);

json to_json(const DiscreteDistribution& dist);
DiscreteDistribution distribution_from_json(const json& doc);

/// A model document: `"type": "discrete"` gives the exact backend,
/// `binary_eta` / `gaussian` the Monte-Carlo backend with `mc_budget` and
/// `mc_seed`.
Oracle oracle_from_json(const json& doc);
RankingRule oracle_bayes(const Oracle& oracle);

/// Reads `oracle` / `model` / `class` and the numeric fields. Unknown keys
/// are rejected.
ExperimentConfig config_from_json(const json& doc);

// ---- results -----------------------------------------------------------------

json to_json(const RiskReport& report);
json to_json(const KernelTable& table);
json to_json(const RademacherEstimate& est);
json to_json(const BoundReport& report);
json to_json(const ErmResult& result);
json to_json(const RateFit& fit);
json to_json(const StudyResult& study);
json to_json(const VarianceStudy& study);
json to_json(const CoverageStudy& study);

/// One row per (n, rep) then one summary row per n:
/// row,n,rep,seed,value,companion,std_error,companion_std_error
std::string study_csv(const StudyResult& study);
/// Columns: log_n log_value log_companion (nan where not positive).
std::string study_plot(const StudyResult& study);

std::string variance_csv(const VarianceStudy& study);
std::string variance_plot(const VarianceStudy& study);

std::string coverage_csv(const CoverageStudy& study);
/// Columns: c coverage, one line per distinct test ratio.
std::string coverage_plot(const CoverageStudy& study);

/// row-major ĥ with its projection column: i,h,hhat_0,...,hhat_{n-1}
std::string kernel_table_csv(const KernelTable& table);

/// rep,seed,z,u,m
std::string complexity_values_csv(const ComplexityEstimates& est);

}  // namespace urank::io
