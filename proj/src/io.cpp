#include "urank/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace urank::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_object(const json& doc, const std::string& what) {
  if (!doc.is_object()) throw ValidationError(fmt::format("{} must be a JSON object", what));
}

void allow_keys(const json& doc, std::initializer_list<const char*> keys, const std::string& what) {
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ValidationError(fmt::format("{}: unknown key \"{}\"", what, key));
  }
}

const json& field(const json& doc, const char* key, const std::string& what) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError(fmt::format("{}: missing \"{}\"", what, key));
  return *it;
}

std::string get_string(const json& doc, const char* key, const std::string& what) {
  const json& v = field(doc, key, what);
  if (!v.is_string()) throw ValidationError(fmt::format("{}: \"{}\" must be a string", what, key));
  return v.get<std::string>();
}

double get_number(const json& doc, const char* key, const std::string& what, std::optional<double> fallback = {}) {
  if (!doc.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(fmt::format("{}: missing \"{}\"", what, key));
  }
  return to_number(doc.at(key), fmt::format("{}.{}", what, key));
}

std::uint64_t get_count(const json& doc, const char* key, const std::string& what,
                        std::optional<std::uint64_t> fallback = {}) {
  if (!doc.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(fmt::format("{}: missing \"{}\"", what, key));
  }
  const json& v = doc.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ValidationError(fmt::format("{}: \"{}\" must be a non-negative integer", what, key));
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& doc, const char* key, bool fallback, const std::string& what) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_boolean()) throw ValidationError(fmt::format("{}: \"{}\" must be true or false", what, key));
  return doc.at(key).get<bool>();
}

std::vector<double> get_numbers(const json& value, const std::string& what) {
  if (value.is_number() || value.is_string()) return {to_number(value, what)};
  if (!value.is_array()) throw ValidationError(fmt::format("{} must be a number or an array of numbers", what));
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) out.push_back(to_number(v, what));
  return out;
}

json box_json(const UniformBox& box) { return {{"lo", box.lo}, {"hi", box.hi}, {"dim", box.dim}}; }

UniformBox box_from_json(const json& doc, const std::string& what) {
  require_object(doc, what);
  allow_keys(doc, {"lo", "hi", "dim"}, what);
  UniformBox box;
  box.lo = get_number(doc, "lo", what, 0.0);
  box.hi = get_number(doc, "hi", what, 1.0);
  box.dim = get_count(doc, "dim", what, 1);
  if (!(std::isfinite(box.lo) && std::isfinite(box.hi) && box.lo < box.hi)) {
    throw ValidationError(fmt::format("{}: need finite lo < hi", what));
  }
  if (box.dim == 0) throw ValidationError(fmt::format("{}: dim must be positive", what));
  return box;
}

std::vector<double> grid_thetas(const json& doc, const std::string& what) {
  if (doc.contains("thetas")) return get_numbers(doc.at("thetas"), what + ".thetas");
  const double lo = get_number(doc, "lo", what);
  const double hi = get_number(doc, "hi", what);
  const std::uint64_t count = get_count(doc, "count", what);
  if (count < 1) throw ValidationError(fmt::format("{}: count must be positive", what));
  if (count == 1) return {lo};
  std::vector<double> thetas(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    thetas[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  return thetas;
}

ThresholdKind kind_from_json(const json& doc, const std::string& what) {
  try {
    return threshold_kind_from_string(get_string(doc, "kind", what));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", what, e.what()));
  }
}

std::vector<RankingRule> grid_rules(const json& doc, const std::string& what) {
  require_object(doc, what);
  allow_keys(doc, {"kind", "thetas", "lo", "hi", "count", "period", "feature"}, what);
  const ThresholdKind kind = kind_from_json(doc, what);
  const auto thetas = grid_thetas(doc, what);
  const double period = get_number(doc, "period", what, 0.0);
  if (kind == ThresholdKind::shift && !(period > 0.0)) {
    throw ValidationError(fmt::format("{}: shift grids need a positive period", what));
  }
  return RuleClass::threshold_grid(kind, thetas, period, get_count(doc, "feature", what, 0)).rules();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------- files

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} for reading", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("error while reading {}", path.string()));
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(fmt::format("cannot create directory {}: {}", path.parent_path().string(), ec.message()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  out.flush();
  if (!out) throw IoError(fmt::format("error while writing {}", path.string()));
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{} is not valid JSON: {}", what, e.what()));
  }
}

json read_json(const std::filesystem::path& path) { return parse_json(read_text(path), path.string()); }

void check_schema(const json& doc, const std::string& what) {
  require_object(doc, what);
  const auto it = doc.find("schema_version");
  if (it == doc.end()) throw ValidationError(fmt::format("{}: missing \"schema_version\"", what));
  if (!it->is_number_integer() || it->get<std::int64_t>() != kSchemaVersion) {
    throw ValidationError(fmt::format("{}: unsupported schema_version {} (expected {})", what, it->dump(),
                                      kSchemaVersion));
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int k = 0; k < length; ++k) hex += fmt::format("{:02x}", digest[k]);
  return hex;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------- numbers

json number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  return value;
}

double to_number(const json& value, const std::string& what) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError(fmt::format("{} must be a number (or \"inf\" / \"-inf\"), got {}", what, value.dump()));
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

// ---------------------------------------------------------------- samples

LabeledSample parse_sample_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  std::vector<double> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_header) {
      if (cells.size() < 2 || cells.back() != "y") {
        throw ValidationError("sample CSV header must be x0,...,x{d-1},y");
      }
      for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
        if (cells[k] != fmt::format("x{}", k)) {
          throw ValidationError(fmt::format("sample CSV header column {} must be x{}, got \"{}\"", k + 1, k, cells[k]));
        }
      }
      dim = cells.size() - 1;
      have_header = true;
      continue;
    }
    if (cells.size() != dim + 1) {
      throw ValidationError(fmt::format("sample CSV line {}: expected {} fields, got {}", line_no, dim + 1, cells.size()));
    }
    for (std::size_t k = 0; k <= dim; ++k) {
      double v = 0.0;
      const char* first = cells[k].data();
      const char* last = first + cells[k].size();
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || cells[k].empty()) {
        throw ValidationError(fmt::format("sample CSV line {}: \"{}\" is not a number", line_no, cells[k]));
      }
      (k < dim ? xs : ys).push_back(v);
    }
  }
  if (!have_header) throw ValidationError("sample CSV is empty");
  return LabeledSample(dim, std::move(xs), std::move(ys));
}

std::string sample_csv(const LabeledSample& sample) {
  std::string out;
  for (std::size_t k = 0; k < sample.dim(); ++k) out += fmt::format("x{},", k);
  out += "y\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (double v : sample.x(i)) out += format_double(v) + ",";
    out += format_double(sample.y(i)) + "\n";
  }
  return out;
}

LabeledSample read_sample_csv(const std::filesystem::path& path) {
  try {
    return parse_sample_csv(read_text(path));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_sample_csv(const std::filesystem::path& path, const LabeledSample& sample) {
  write_text(path, sample_csv(sample));
}

// ---------------------------------------------------------------- functions and rules

json to_json(const ScalarFn& fn) {
  switch (fn.kind()) {
    case FnKind::constant:
      return {{"kind", "constant"}, {"value", fn.value()}};
    case FnKind::linear:
      return {{"kind", "linear"}, {"weights", fn.weights()}, {"bias", fn.bias()}};
    case FnKind::logistic:
      return {{"kind", "logistic"}, {"weights", fn.weights()}, {"bias", fn.bias()}};
    case FnKind::step:
      return {{"kind", "step"}, {"theta", number(fn.theta())}, {"feature", fn.feature()}};
    case FnKind::shift:
      return {{"kind", "shift"}, {"theta", number(fn.theta())}, {"period", fn.period()}, {"feature", fn.feature()}};
    case FnKind::custom:
      break;
  }
  throw ValidationError(fmt::format("custom function \"{}\" cannot be serialized", fn.name()));
}

ScalarFn scalar_fn_from_json(const json& doc) {
  const std::string what = "function";
  if (doc.is_number()) return ScalarFn::constant(doc.get<double>());
  require_object(doc, what);
  const std::string kind = get_string(doc, "kind", what);
  if (kind == "constant") {
    allow_keys(doc, {"kind", "value"}, what);
    return ScalarFn::constant(get_number(doc, "value", what));
  }
  if (kind == "linear" || kind == "logistic") {
    allow_keys(doc, {"kind", "weights", "bias"}, what);
    auto weights = get_numbers(field(doc, "weights", what), what + ".weights");
    const double bias = get_number(doc, "bias", what, 0.0);
    return kind == "linear" ? ScalarFn::linear(std::move(weights), bias) : ScalarFn::logistic(std::move(weights), bias);
  }
  if (kind == "step") {
    allow_keys(doc, {"kind", "theta", "feature"}, what);
    return ScalarFn::step(get_number(doc, "theta", what), get_count(doc, "feature", what, 0));
  }
  if (kind == "shift") {
    allow_keys(doc, {"kind", "theta", "period", "feature"}, what);
    return ScalarFn::shift(get_number(doc, "theta", what), get_number(doc, "period", what),
                           get_count(doc, "feature", what, 0));
  }
  throw ValidationError(fmt::format("unknown function kind \"{}\"", kind));
}

json to_json(const RankingRule& rule) {
  json doc;
  if (const ScalarFn* fn = rule.scorer_fn()) {
    doc = {{"type", "scorer"}, {"id", rule.id()}, {"scorer", to_json(*fn)}};
  } else {
    const auto* table = rule.table_data();
    const std::size_t m = table->keys.size();
    json signs = json::array();
    for (std::size_t a = 0; a < m; ++a) {
      json row = json::array();
      for (std::size_t b = 0; b < m; ++b) row.push_back((*table->signs)[a * m + b]);
      signs.push_back(std::move(row));
    }
    doc = {{"type", "table"}, {"id", rule.id()}, {"dim", table->dim}, {"keys", table->keys}, {"signs", signs}};
  }
  if (rule.is_negated()) doc["negated"] = true;
  return doc;
}

RankingRule rule_from_json(const json& doc, const RankingRule* bayes) {
  const std::string what = "rule";
  require_object(doc, what);
  const std::string type = get_string(doc, "type", what);
  const bool negated = get_bool(doc, "negated", false, what);
  if (type == "bayes") {
    allow_keys(doc, {"schema_version", "type", "negated"}, what);
    if (!bayes) throw ValidationError("a {\"type\": \"bayes\"} rule needs a model or distribution to resolve it");
    return negated ? bayes->negated() : *bayes;
  }
  if (type == "scorer") {
    allow_keys(doc, {"schema_version", "type", "id", "scorer", "negated"}, what);
    const std::string id = get_string(doc, "id", what);
    RankingRule rule = RankingRule::scorer(id, scalar_fn_from_json(field(doc, "scorer", what)));
    return negated ? rule.negated(id) : rule;
  }
  if (type == "table") {
    allow_keys(doc, {"schema_version", "type", "id", "dim", "keys", "signs", "negated"}, what);
    const std::string id = get_string(doc, "id", what);
    const std::size_t dim = get_count(doc, "dim", what, 1);
    const json& keys_doc = field(doc, "keys", what);
    if (!keys_doc.is_array()) throw ValidationError("rule.keys must be an array");
    std::vector<std::vector<double>> keys;
    for (const auto& k : keys_doc) {
      keys.push_back(get_numbers(k, "rule.keys"));
      if (keys.back().size() != dim) throw ValidationError(fmt::format("rule.keys entries must have {} values", dim));
    }
    const json& signs_doc = field(doc, "signs", what);
    if (!signs_doc.is_array() || signs_doc.size() != keys.size()) {
      throw ValidationError("rule.signs must be a square array matching keys");
    }
    std::vector<int> signs;
    for (const auto& row : signs_doc) {
      if (!row.is_array() || row.size() != keys.size()) {
        throw ValidationError("rule.signs must be a square array matching keys");
      }
      for (const auto& s : row) {
        if (!s.is_number_integer()) throw ValidationError("rule.signs entries must be +1 or -1");
        signs.push_back(s.get<int>());
      }
    }
    RankingRule rule = RankingRule::table(id, dim, std::move(keys), std::move(signs));
    return negated ? rule.negated(id) : rule;
  }
  throw ValidationError(fmt::format("unknown rule type \"{}\"", type));
}

ClassSpec class_from_json(const json& doc, const RankingRule* bayes) {
  const std::string what = "class";
  require_object(doc, what);
  allow_keys(doc, {"schema_version", "rules", "threshold_grid", "include_bayes", "family", "vc_dim"}, what);
  ClassSpec spec;
  std::vector<RankingRule> rules;
  if (doc.contains("rules")) {
    const json& list = doc.at("rules");
    if (!list.is_array()) throw ValidationError("class.rules must be an array");
    for (const auto& r : list) rules.push_back(rule_from_json(r, bayes));
  }
  std::size_t grids = 0;
  if (doc.contains("threshold_grid")) {
    const json& g = doc.at("threshold_grid");
    const json list = g.is_array() ? g : json::array({g});
    for (const auto& item : list) {
      auto more = grid_rules(item, "class.threshold_grid");
      rules.insert(rules.end(), more.begin(), more.end());
      ++grids;
    }
  }
  if (get_bool(doc, "include_bayes", false, what)) {
    if (!bayes) throw ValidationError("class.include_bayes needs a model or distribution to resolve the Bayes rule");
    rules.push_back(*bayes);
  }
  if (doc.contains("family")) {
    if (!rules.empty()) throw ValidationError("class: give either a threshold family or a list of rules, not both");
    const json& f = doc.at("family");
    require_object(f, "class.family");
    allow_keys(f, {"kind", "period"}, "class.family");
    ThresholdFamily family;
    family.kind = kind_from_json(f, "class.family");
    family.period = get_number(f, "period", "class.family", 0.0);
    spec.family = family;
    return spec;
  }
  if (rules.empty()) throw ValidationError("class: needs \"rules\", \"threshold_grid\" or \"family\"");
  std::set<std::string> ids;
  for (const auto& r : rules) {
    if (!ids.insert(r.id()).second) throw ValidationError(fmt::format("class: duplicate rule id \"{}\"", r.id()));
  }
  std::optional<int> vc;
  if (doc.contains("vc_dim")) {
    vc = static_cast<int>(get_count(doc, "vc_dim", what));
  } else if (grids == 1 && !doc.contains("rules") && !doc.contains("include_bayes")) {
    vc = 1;
  }
  spec.rules = RuleClass(std::move(rules), vc);
  return spec;
}

// ---------------------------------------------------------------- models

json to_json(const GenerativeModel& model) {
  if (const auto* b = std::get_if<BinaryEta>(&model.spec())) {
    return {{"type", "binary_eta"}, {"eta", to_json(b->eta)}, {"x", box_json(b->x)}, {"density_bound", b->density_bound}};
  }
  const auto& g = std::get<GaussianRegression>(model.spec());
  return {{"type", "gaussian"}, {"mean", to_json(g.mean)}, {"sigma", to_json(g.sigma)}, {"x", box_json(g.x)}};
}

GenerativeModel model_from_json(const json& doc) {
  const std::string what = "model";
  require_object(doc, what);
  const std::string type = get_string(doc, "type", what);
  const UniformBox box = doc.contains("x") ? box_from_json(doc.at("x"), "model.x") : UniformBox{};
  if (type == "binary_eta") {
    allow_keys(doc, {"schema_version", "type", "eta", "x", "density_bound", "mc_budget", "mc_seed"}, what);
    return GenerativeModel::binary_eta(scalar_fn_from_json(field(doc, "eta", what)), box,
                                       get_number(doc, "density_bound", what, 1.0));
  }
  if (type == "gaussian") {
    allow_keys(doc, {"schema_version", "type", "mean", "sigma", "x", "mc_budget", "mc_seed"}, what);
    return GenerativeModel::gaussian(scalar_fn_from_json(field(doc, "mean", what)),
                                     scalar_fn_from_json(field(doc, "sigma", what)), box);
  }
  throw ValidationError(fmt::format("unknown model type \"{}\" (expected binary_eta or gaussian)", type));
}

json to_json(const DiscreteDistribution& dist) {
  json atoms = json::array();
  for (std::size_t a = 0; a < dist.size(); ++a) {
    const auto x = dist.x(a);
    atoms.push_back({{"x", std::vector<double>(x.begin(), x.end())}, {"y", dist.y(a)}, {"p", dist.prob(a)}});
  }
  return {{"type", "discrete"}, {"dim", dist.dim()}, {"atoms", atoms}};
}

DiscreteDistribution distribution_from_json(const json& doc) {
  const std::string what = "distribution";
  require_object(doc, what);
  allow_keys(doc, {"schema_version", "type", "dim", "atoms"}, what);
  if (get_string(doc, "type", what) != "discrete") throw ValidationError("distribution: type must be \"discrete\"");
  const std::size_t dim = get_count(doc, "dim", what, 1);
  const json& atoms = field(doc, "atoms", what);
  if (!atoms.is_array() || atoms.empty()) throw ValidationError("distribution.atoms must be a non-empty array");
  std::vector<double> xs, ys, ps;
  for (const auto& atom : atoms) {
    require_object(atom, "distribution atom");
    allow_keys(atom, {"x", "y", "p"}, "distribution atom");
    const auto x = get_numbers(field(atom, "x", "distribution atom"), "atom.x");
    if (x.size() != dim) throw ValidationError(fmt::format("distribution atoms need {} feature values", dim));
    xs.insert(xs.end(), x.begin(), x.end());
    ys.push_back(get_number(atom, "y", "distribution atom"));
    ps.push_back(get_number(atom, "p", "distribution atom"));
  }
  return DiscreteDistribution(dim, std::move(xs), std::move(ys), std::move(ps));
}

Oracle oracle_from_json(const json& doc) {
  require_object(doc, "oracle");
  if (get_string(doc, "type", "oracle") == "discrete") return distribution_from_json(doc);
  McOracle mc{model_from_json(doc)};
  mc.budget = get_count(doc, "mc_budget", "oracle", 10000);
  mc.seed = get_count(doc, "mc_seed", "oracle", 0);
  if (mc.budget < 2) throw ValidationError("oracle.mc_budget must be at least 2");
  return mc;
}

RankingRule oracle_bayes(const Oracle& oracle) {
  if (const auto* d = std::get_if<DiscreteDistribution>(&oracle)) return bayes_rule(*d);
  return bayes_rule(std::get<McOracle>(oracle).model);
}

ExperimentConfig config_from_json(const json& doc) {
  const std::string what = "config";
  check_schema(doc, what);
  allow_keys(doc,
             {"schema_version", "study", "oracle", "model", "class", "n_grid", "reps", "seed", "delta", "epsilon",
              "alpha_grid", "n", "complexity_reps", "calibration_runs", "test_runs"},
             what);
  ExperimentConfig config;
  std::optional<RankingRule> bayes;
  if (doc.contains("oracle")) {
    config.oracle = distribution_from_json(doc.at("oracle"));
    bayes = bayes_rule(*config.oracle);
  }
  if (doc.contains("model")) {
    config.model = model_from_json(doc.at("model"));
    if (!bayes) bayes = bayes_rule(*config.model);
  }
  if (doc.contains("class")) {
    ClassSpec spec = class_from_json(doc.at("class"), bayes ? &*bayes : nullptr);
    config.rules = std::move(spec.rules);
    config.family = spec.family;
  }
  if (doc.contains("n_grid")) {
    const json& g = doc.at("n_grid");
    if (!g.is_array()) throw ValidationError("config.n_grid must be an array of integers");
    for (const auto& v : g) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ValidationError("config.n_grid must be an array of non-negative integers");
      }
      config.n_grid.push_back(v.get<std::size_t>());
    }
  }
  config.reps = get_count(doc, "reps", what, config.reps);
  config.seed = get_count(doc, "seed", what, config.seed);
  config.delta = get_number(doc, "delta", what, config.delta);
  config.epsilon = get_number(doc, "epsilon", what, config.epsilon);
  if (doc.contains("alpha_grid")) config.alpha_grid = get_numbers(doc.at("alpha_grid"), "config.alpha_grid");
  config.n = get_count(doc, "n", what, config.n);
  config.complexity_reps = get_count(doc, "complexity_reps", what, config.complexity_reps);
  config.calibration_runs = get_count(doc, "calibration_runs", what, config.calibration_runs);
  config.test_runs = get_count(doc, "test_runs", what, config.test_runs);
  return config;
}

// ---------------------------------------------------------------- results

json to_json(const RiskReport& report) {
  return {{"l_n", report.l_n},
          {"ordered_pair_count", report.ordered_pair_count},
          {"error_pair_count", report.error_pair_count}};
}

json to_json(const KernelTable& table) {
  return {{"n", table.size()},       {"lambda", table.lambda()}, {"lambda_n", table.lambda_n()},
          {"t_n", table.t_n()},      {"w_n", table.w_n()},       {"residual", table.residual()},
          {"exact", table.exact()}};
}

json to_json(const RademacherEstimate& est) {
  return {{"quantity", to_string(est.quantity)},
          {"mean", est.mean},
          {"std_error", est.std_error},
          {"reps", est.reps},
          {"seed", est.seed}};
}

json to_json(const BoundReport& report) {
  return {{"n", report.n},
          {"delta", report.delta},
          {"estimates",
           {{"Z", to_json(report.estimates.z)}, {"U", to_json(report.estimates.u)}, {"M", to_json(report.estimates.m)}}},
          {"term_z", report.term_z},
          {"term_u", report.term_u},
          {"term_m", report.term_m},
          {"term_log", report.term_log},
          {"rhs_shape", report.rhs_shape},
          {"observed_sup_wn", report.observed_sup_wn}};
}

json to_json(const ErmResult& result) {
  json doc = {{"minimizer", to_json(result.minimizer)},
              {"min_risk", result.min_risk},
              {"min_error_pairs", result.min_error_pairs},
              {"ties", result.ties}};
  if (result.per_rule_risks) {
    json list = json::array();
    for (const auto& [id, risk] : *result.per_rule_risks) list.push_back({{"id", id}, {"risk", risk}});
    doc["per_rule_risks"] = std::move(list);
  }
  return doc;
}

json to_json(const RateFit& fit) {
  json points = json::array();
  for (const auto& [x, y] : fit.points) points.push_back({x, y});
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"points", points}};
}

json to_json(const StudyResult& study) {
  json summary = json::array();
  for (const auto& s : study.summary) {
    summary.push_back({{"n", s.n},
                       {"mean", s.mean},
                       {"std_error", s.std_error},
                       {"companion_mean", s.companion_mean},
                       {"companion_std_error", s.companion_std_error}});
  }
  return {{"study", study.name},
          {"value", study.value_label},
          {"companion", study.companion_label},
          {"status", study.status},
          {"monotone", study.monotone},
          {"fit", study.fit ? to_json(*study.fit) : json(nullptr)},
          {"companion_fit", study.companion_fit ? to_json(*study.companion_fit) : json(nullptr)},
          {"summary", summary}};
}

json to_json(const VarianceStudy& study) {
  json rows = json::array();
  for (const auto& r : study.rows) {
    rows.push_back({{"id", r.id}, {"excess", r.excess}, {"var_h", r.var_h}, {"excluded", r.excluded}});
  }
  json fits = json::array();
  const auto fit_json = [](const AlphaFit& f) {
    return json{{"alpha", f.alpha}, {"c", number(f.c)}, {"feasible", f.feasible}};
  };
  for (const auto& f : study.fits) fits.push_back(fit_json(f));
  return {{"study", "variance"},
          {"rows", rows},
          {"fits", fits},
          {"best", study.best ? fit_json(*study.best) : json(nullptr)}};
}

json to_json(const CoverageStudy& study) {
  std::size_t calibration = 0;
  for (const auto& r : study.runs) calibration += r.calibration ? 1 : 0;
  return {{"study", "coverage"},
          {"delta", study.delta},
          {"fitted_c", study.fitted_c},
          {"coverage", study.coverage},
          {"std_error", study.std_error},
          {"ci_low", study.ci_low},
          {"ci_high", study.ci_high},
          {"calibration_runs", calibration},
          {"test_runs", study.runs.size() - calibration}};
}

std::string study_csv(const StudyResult& study) {
  std::string out = "row,n,rep,seed,value,companion,std_error,companion_std_error\n";
  for (const auto& c : study.cells) {
    out += fmt::format("cell,{},{},{},{},{},,\n", c.n, c.rep, c.seed, format_double(c.value),
                       format_double(c.companion));
  }
  for (const auto& s : study.summary) {
    out += fmt::format("summary,{},,,{},{},{},{}\n", s.n, format_double(s.mean), format_double(s.companion_mean),
                       format_double(s.std_error), format_double(s.companion_std_error));
  }
  return out;
}

std::string study_plot(const StudyResult& study) {
  const auto log_or_nan = [](double v) { return v > 0.0 ? std::log(v) : std::numeric_limits<double>::quiet_NaN(); };
  std::string out = fmt::format("# log_n log_{} log_{}\n", study.value_label, study.companion_label);
  for (const auto& s : study.summary) {
    out += fmt::format("{} {} {}\n", format_double(std::log(static_cast<double>(s.n))),
                       format_double(log_or_nan(s.mean)), format_double(log_or_nan(s.companion_mean)));
  }
  return out;
}

std::string variance_csv(const VarianceStudy& study) {
  std::string out = "row,id,excess,var_h,excluded,alpha,c,feasible\n";
  for (const auto& r : study.rows) {
    out += fmt::format("rule,{},{},{},{},,,\n", csv_field(r.id), format_double(r.excess), format_double(r.var_h),
                       r.excluded ? 1 : 0);
  }
  for (const auto& f : study.fits) {
    out += fmt::format("fit,,,,,{},{},{}\n", format_double(f.alpha), format_double(f.c), f.feasible ? 1 : 0);
  }
  return out;
}

std::string variance_plot(const VarianceStudy& study) {
  std::string out = "# log_excess log_var_h\n";
  for (const auto& r : study.rows) {
    if (r.excluded || !(r.excess > 0.0) || !(r.var_h > 0.0)) continue;
    out += fmt::format("{} {}\n", format_double(std::log(r.excess)), format_double(std::log(r.var_h)));
  }
  return out;
}

std::string coverage_csv(const CoverageStudy& study) {
  std::string out = "row,index,split,seed,sup_wn,rhs_shape,ratio\n";
  for (const auto& r : study.runs) {
    out += fmt::format("run,{},{},{},{},{},{}\n", r.index, r.calibration ? "calibration" : "test", r.seed,
                       format_double(r.sup_wn), format_double(r.rhs_shape), format_double(r.ratio));
  }
  return out;
}

std::string coverage_plot(const CoverageStudy& study) {
  std::vector<double> test;
  for (const auto& r : study.runs) {
    if (!r.calibration) test.push_back(r.ratio);
  }
  std::sort(test.begin(), test.end());
  test.erase(std::unique(test.begin(), test.end()), test.end());
  std::vector<double> all;
  for (const auto& r : study.runs) {
    if (!r.calibration) all.push_back(r.ratio);
  }
  std::string out = "# c coverage\n";
  for (double c : test) out += fmt::format("{} {}\n", format_double(c), format_double(coverage_at(c, all)));
  return out;
}

std::string kernel_table_csv(const KernelTable& table) {
  const std::size_t n = table.size();
  std::string out = "i,h";
  for (std::size_t j = 0; j < n; ++j) out += fmt::format(",hhat_{}", j);
  out += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += fmt::format("{},{}", i, format_double(table.h()[i]));
    if (table.has_matrix()) {
      for (std::size_t j = 0; j < n; ++j) out += "," + format_double(table.hhat(i, j));
    }
    out += "\n";
  }
  return out;
}

std::string complexity_values_csv(const ComplexityEstimates& est) {
  std::string out = "rep,seed,z,u,m\n";
  for (std::size_t k = 0; k < est.z.values.size(); ++k) {
    out += fmt::format("{},{},{},{},{}\n", k, est.z.seed + k, format_double(est.z.values[k]),
                       format_double(est.u.values[k]), format_double(est.m.values[k]));
  }
  return out;
}

}  // namespace urank::io
