#include "urank/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "urank/io.hpp"

namespace urank::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

// A command is fully described by its name and a JSON config; the same
// pair drives the first run and every replay from the manifest.
struct Output {
  std::string role;
  std::string file;  // relative to the manifest directory
  std::string content;
};

struct Job {
  std::string command;
  json config;
  std::map<std::string, std::string> files;  // role -> relative path
};

json input_file(const std::string& path) {
  const std::string text = io::read_text(path);
  return {{"path", fs::absolute(path).lexically_normal().string()}, {"sha256", io::sha256_hex(text)}};
}

LabeledSample load_sample(const json& ref) {
  const std::string path = ref.at("path").get<std::string>();
  const std::string text = io::read_text(path);
  if (io::sha256_hex(text) != ref.at("sha256").get<std::string>()) {
    throw ValidationError(fmt::format("{} changed since the manifest was written", path));
  }
  try {
    return io::parse_sample_csv(text);
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path, e.what()));
  }
}

json load_document(const std::string& path, bool versioned = true) {
  json doc = io::read_json(path);
  if (versioned) io::check_schema(doc, path);
  return doc;
}

std::optional<Oracle> oracle_of(const json& config) {
  if (!config.contains("oracle") || config.at("oracle").is_null()) return std::nullopt;
  return io::oracle_from_json(config.at("oracle"));
}

RankingRule bayes_of(const json& config, const std::optional<Oracle>& oracle) {
  if (config.contains("bayes") && !config.at("bayes").is_null()) {
    const std::optional<RankingRule> model_bayes = oracle ? std::optional(io::oracle_bayes(*oracle)) : std::nullopt;
    return io::rule_from_json(config.at("bayes"), model_bayes ? &*model_bayes : nullptr);
  }
  if (!oracle) throw ValidationError("this command needs --oracle (or --bayes) to know the Bayes rule");
  return io::oracle_bayes(*oracle);
}

void add(std::vector<Output>& outputs, const Job& job, const std::string& role, std::string content) {
  const auto it = job.files.find(role);
  if (it != job.files.end()) outputs.push_back({role, it->second, std::move(content)});
}

std::vector<Output> execute_risk(const Job& job, unsigned threads) {
  const json& c = job.config;
  const LabeledSample s = load_sample(c.at("sample"));
  const auto oracle = oracle_of(c);
  const std::optional<RankingRule> bayes = oracle ? std::optional(io::oracle_bayes(*oracle)) : std::nullopt;
  const RankingRule rule = io::rule_from_json(c.at("rule"), bayes ? &*bayes : nullptr);
  const auto fast = rule.is_scorer() ? empirical_risk_fast(s, rule) : std::nullopt;
  const RiskReport report = fast ? *fast : empirical_risk_naive(s, rule, threads);
  json doc = io::to_json(report);
  doc["rule_id"] = rule.id();
  doc["n"] = s.size();
  doc["method"] = fast ? "fast" : "naive";
  std::vector<Output> outputs;
  add(outputs, job, "report", io::dump(doc));
  return outputs;
}

std::vector<Output> execute_decompose(const Job& job, unsigned threads) {
  const json& c = job.config;
  const LabeledSample s = load_sample(c.at("sample"));
  const auto oracle = oracle_of(c);
  if (!oracle) throw ValidationError("decompose needs --oracle");
  const RankingRule bayes = bayes_of(c, oracle);
  const RankingRule rule = io::rule_from_json(c.at("rule"), &bayes);
  const KernelTable table = decompose(s, rule, bayes, *oracle, threads);
  json doc = io::to_json(table);
  doc["rule_id"] = rule.id();
  doc["bayes_id"] = bayes.id();
  std::vector<Output> outputs;
  add(outputs, job, "report", io::dump(doc));
  add(outputs, job, "table", io::kernel_table_csv(table));
  return outputs;
}

std::vector<Output> execute_complexity(const Job& job, unsigned threads) {
  const json& c = job.config;
  const LabeledSample s = load_sample(c.at("sample"));
  const auto oracle = oracle_of(c);
  if (!oracle) throw ValidationError("complexity needs --oracle");
  const RankingRule bayes = bayes_of(c, oracle);
  const io::ClassSpec spec = io::class_from_json(c.at("class"), &bayes);
  if (!spec.rules) throw ValidationError("complexity needs a materialized rule class (rules or threshold_grid)");
  const auto& opt = c.at("options");
  const auto tables = class_tables(s, *spec.rules, bayes, *oracle, threads);
  const BoundReport report =
      bound_report(tables, opt.at("delta").get<double>(), opt.at("reps").get<std::size_t>(),
                   c.at("seed").get<std::uint64_t>(), opt.at("include_diagonal").get<bool>(), threads);
  json doc = io::to_json(report);
  doc["include_diagonal"] = opt.at("include_diagonal");
  doc["class_size"] = spec.rules->size();
  std::vector<Output> outputs;
  add(outputs, job, "report", io::dump(doc));
  add(outputs, job, "values", io::complexity_values_csv(report.estimates));
  return outputs;
}

std::vector<Output> execute_erm(const Job& job, unsigned threads) {
  const json& c = job.config;
  const LabeledSample s = load_sample(c.at("sample"));
  const auto oracle = oracle_of(c);
  const std::optional<RankingRule> bayes = oracle ? std::optional(io::oracle_bayes(*oracle)) : std::nullopt;
  const io::ClassSpec spec = io::class_from_json(c.at("class"), bayes ? &*bayes : nullptr);
  const bool per_rule = c.at("options").at("per_rule").get<bool>();
  const ErmResult result = spec.family ? erm_threshold_scan(s, *spec.family, per_rule)
                                       : erm_exhaustive(s, *spec.rules, per_rule, threads);
  json doc = io::to_json(result);
  doc["method"] = spec.family ? "threshold_scan" : "exhaustive";
  std::vector<Output> outputs;
  add(outputs, job, "report", io::dump(doc));
  return outputs;
}

std::vector<Output> execute_experiment(const Job& job, unsigned threads) {
  ExperimentConfig config = io::config_from_json(job.config);
  config.threads = threads;
  std::vector<Output> outputs;
  const std::string study = job.command.substr(job.command.find(' ') + 1);
  if (study == "wn-decay" || study == "rate") {
    const StudyResult result = study == "rate" ? excess_risk_rate_study(config) : wn_decay_study(config);
    add(outputs, job, "results", io::study_csv(result));
    add(outputs, job, "plot", io::study_plot(result));
    add(outputs, job, "summary", io::dump(io::to_json(result)));
  } else if (study == "variance") {
    if (!config.oracle) throw ValidationError("the variance study needs an exact discrete oracle");
    if (!config.rules) throw ValidationError("the variance study needs a materialized rule class");
    const VarianceStudy result = variance_condition_study(*config.rules, *config.oracle, config.alpha_grid);
    add(outputs, job, "results", io::variance_csv(result));
    add(outputs, job, "plot", io::variance_plot(result));
    add(outputs, job, "summary", io::dump(io::to_json(result)));
  } else if (study == "coverage") {
    const CoverageStudy result = coverage_study(config);
    add(outputs, job, "results", io::coverage_csv(result));
    add(outputs, job, "plot", io::coverage_plot(result));
    add(outputs, job, "summary", io::dump(io::to_json(result)));
  } else {
    throw ValidationError(fmt::format("unknown experiment \"{}\"", study));
  }
  return outputs;
}

std::vector<Output> execute(const Job& job, unsigned threads) {
  if (job.command == "risk") return execute_risk(job, threads);
  if (job.command == "decompose") return execute_decompose(job, threads);
  if (job.command == "complexity") return execute_complexity(job, threads);
  if (job.command == "erm") return execute_erm(job, threads);
  if (job.command.rfind("experiment ", 0) == 0) return execute_experiment(job, threads);
  throw ValidationError(fmt::format("unknown command \"{}\"", job.command));
}

json base_seed(const Job& job) {
  if (job.config.contains("seed")) return job.config.at("seed");
  return nullptr;
}

// Writes the outputs under `dir` and the manifest at `manifest_path`.
json write_outputs(const Job& job, const std::vector<Output>& outputs, const fs::path& dir,
                   const fs::path& manifest_path) {
  json listed = json::array();
  for (const auto& o : outputs) {
    io::write_text(dir / o.file, o.content);
    listed.push_back({{"role", o.role}, {"file", o.file}, {"sha256", io::sha256_hex(o.content)}});
  }
  json manifest = {{"schema_version", io::kSchemaVersion},
                   {"artifact", "urank"},
                   {"artifact_version", URANK_VERSION},
                   {"command", job.command},
                   {"seed", base_seed(job)},
                   {"config", job.config},
                   {"outputs", listed}};
  io::write_text(manifest_path, io::dump(manifest));
  return manifest;
}

std::string relative_to(const fs::path& file, const fs::path& dir) {
  const fs::path abs = fs::absolute(file).lexically_normal();
  const fs::path rel = abs.lexically_relative(fs::absolute(dir).lexically_normal());
  if (rel.empty() || *rel.begin() == "..") {
    throw ValidationError(fmt::format("{} must be inside the directory of the main output {}", file.string(),
                                      dir.string()));
  }
  return rel.generic_string();
}

// Single-output commands: --out FILE puts the manifest at FILE.manifest.json
// and extra outputs alongside; without --out the report goes to stdout.
int finish_single(Job& job, const std::string& out_path, const std::map<std::string, std::string>& extra,
                  unsigned threads, std::ostream& out) {
  if (out_path.empty()) {
    if (!extra.empty()) throw ValidationError("extra output files need --out");
    job.files["report"] = "report";
    const auto outputs = execute(job, threads);
    out << outputs.front().content;
    return kExitOk;
  }
  const fs::path main(out_path);
  const fs::path dir = main.has_parent_path() ? main.parent_path() : fs::path(".");
  job.files["report"] = main.filename().string();
  for (const auto& [role, path] : extra) job.files[role] = relative_to(path, dir);
  const auto outputs = execute(job, threads);
  const fs::path manifest = dir / (main.filename().string() + ".manifest.json");
  write_outputs(job, outputs, dir, manifest);
  out << fmt::format("wrote {} (manifest {})\n", main.string(), manifest.string());
  return kExitOk;
}

int finish_experiment(Job& job, const std::string& out_dir, unsigned threads, std::ostream& out) {
  job.files = {{"results", "results.csv"}, {"plot", "plot.dat"}, {"summary", "summary.json"}};
  const auto outputs = execute(job, threads);
  const fs::path dir(out_dir);
  write_outputs(job, outputs, dir, dir / "manifest.json");
  for (const auto& o : outputs) {
    if (o.role != "summary") continue;
    const json summary = json::parse(o.content);
    if (summary.contains("fit") && !summary["fit"].is_null()) {
      out << fmt::format("{}: slope {:.4f} (r2 {:.4f}), status {}\n", job.command,
                         summary["fit"]["slope"].get<double>(), summary["fit"]["r2"].get<double>(),
                         summary["status"].get<std::string>());
    } else if (summary.contains("coverage")) {
      out << fmt::format("{}: coverage {:.4f} at C = {:.6g}\n", job.command, summary["coverage"].get<double>(),
                         summary["fitted_c"].get<double>());
    } else if (summary.contains("best") && !summary["best"].is_null()) {
      out << fmt::format("{}: largest feasible alpha {}\n", job.command, summary["best"]["alpha"].dump());
    } else {
      out << fmt::format("{}: wrote {}\n", job.command, dir.string());
    }
  }
  return kExitOk;
}

int replay(const std::string& manifest_path, const std::string& out_dir, unsigned threads, std::ostream& out) {
  const json manifest = load_document(manifest_path);
  Job job;
  try {
    job.command = manifest.at("command").get<std::string>();
    job.config = manifest.at("config");
    for (const auto& o : manifest.at("outputs")) job.files[o.at("role").get<std::string>()] = o.at("file");
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: malformed manifest ({})", manifest_path, e.what()));
  }
  const std::string version = manifest.value("artifact_version", "");
  if (version != URANK_VERSION) {
    out << fmt::format("note: manifest written by version {}, replaying with {}\n", version, URANK_VERSION);
  }
  const auto outputs = execute(job, threads);
  const fs::path dir(out_dir);
  const json fresh = write_outputs(job, outputs, dir, dir / fs::path(manifest_path).filename());
  bool identical = true;
  for (const auto& o : manifest.at("outputs")) {
    const auto it = std::find_if(fresh["outputs"].begin(), fresh["outputs"].end(),
                                 [&](const json& f) { return f["role"] == o["role"]; });
    const bool same = it != fresh["outputs"].end() && (*it)["sha256"] == o["sha256"];
    identical = identical && same;
    out << fmt::format("{} {}\n", same ? "identical" : "DIFFERS  ", o.at("file").get<std::string>());
  }
  if (!identical) {
    out << "replay did not reproduce the recorded digests\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Empirical minimization of the pairwise ranking risk.", "urank"};
  app.set_version_flag("--version", std::string(URANK_VERSION));
  app.require_subcommand(1);

  std::string sample_path, rule_path, oracle_path, bayes_path, class_path, config_path;
  std::string out_path, out_dir, table_csv, values_csv, manifest_path;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<double> delta, epsilon;
  bool include_diagonal = false;
  bool per_rule = false;

  const auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores); outputs do not depend on it");
  };

  auto* risk = app.add_subcommand("risk", "Empirical ranking risk L_n of one rule");
  risk->add_option("--sample", sample_path, "Sample CSV (x0,...,y)")->required();
  risk->add_option("--rule", rule_path, "Rule JSON")->required();
  risk->add_option("--oracle", oracle_path, "Model JSON, needed when the rule is {\"type\": \"bayes\"}");
  risk->add_option("--out", out_path, "Report JSON (stdout when omitted)");
  add_threads(risk);

  auto* dec = app.add_subcommand("decompose", "Hoeffding decomposition of the excess-risk estimate");
  dec->add_option("--sample", sample_path, "Sample CSV")->required();
  dec->add_option("--rule", rule_path, "Rule JSON")->required();
  dec->add_option("--oracle", oracle_path, "Model JSON supplying expectations")->required();
  dec->add_option("--bayes", bayes_path, "Reference rule JSON (default: the oracle's Bayes rule)");
  dec->add_option("--out", out_path, "Summary JSON (stdout when omitted)");
  dec->add_option("--table-csv", table_csv, "Also write the n x n kernel table");
  add_threads(dec);

  auto* cx = app.add_subcommand("complexity", "Rademacher quantities and the moment-inequality right-hand side");
  cx->add_option("--sample", sample_path, "Sample CSV")->required();
  cx->add_option("--class", class_path, "Class JSON")->required();
  cx->add_option("--oracle", oracle_path, "Model JSON supplying expectations")->required();
  cx->add_option("--bayes", bayes_path, "Reference rule JSON (default: the oracle's Bayes rule)");
  cx->add_option("--reps", reps, "Sign-vector replicates (default 50)");
  cx->add_option("--seed", seed, "Base seed; replicate k uses seed + k (default 1)");
  cx->add_option("--delta", delta, "Confidence parameter in (0, 1) (default 0.1)");
  cx->add_flag("--include-diagonal", include_diagonal, "Include i = j terms in the sign sums");
  cx->add_option("--out", out_path, "Report JSON (stdout when omitted)");
  cx->add_option("--values-csv", values_csv, "Also write per-replicate values");
  add_threads(cx);

  auto* erm = app.add_subcommand("erm", "Empirical risk minimizer over a class");
  erm->add_option("--sample", sample_path, "Sample CSV")->required();
  erm->add_option("--class", class_path, "Class JSON")->required();
  erm->add_option("--oracle", oracle_path, "Model JSON, needed when the class includes the Bayes rule");
  erm->add_flag("--per-rule", per_rule, "List the empirical risk of every rule");
  erm->add_option("--out", out_path, "Result JSON (stdout when omitted)");
  add_threads(erm);

  auto* exp = app.add_subcommand("experiment", "Seeded Monte-Carlo studies");
  exp->require_subcommand(1);
  std::vector<CLI::App*> studies;
  for (const char* name : {"wn-decay", "variance", "rate", "coverage"}) {
    auto* s = exp->add_subcommand(name, fmt::format("Run the {} study", name));
    s->add_option("--config", config_path, "Experiment config JSON")->required();
    s->add_option("--out-dir", out_dir, "Directory for results, plot data and manifest")->required();
    s->add_option("--seed", seed, "Override the config's base seed");
    s->add_option("--reps", reps, "Override the config's replicates per n");
    s->add_option("--delta", delta, "Override the config's delta");
    s->add_option("--epsilon", epsilon, "Override the config's epsilon");
    add_threads(s);
    studies.push_back(s);
  }

  auto* rep = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  rep->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  rep->add_option("--out-dir", out_dir, "Directory for the re-run outputs")->required();
  add_threads(rep);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << URANK_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << " (run with --help for usage)\n";
    return kExitValidation;
  }

  try {
    Job job;
    const auto load_oracle = [&]() { return oracle_path.empty() ? json(nullptr) : load_document(oracle_path); };
    if (risk->parsed() || dec->parsed() || cx->parsed() || erm->parsed()) {
      job.config["sample"] = input_file(sample_path);
      job.config["oracle"] = load_oracle();
      std::map<std::string, std::string> extra;
      if (risk->parsed() || dec->parsed()) job.config["rule"] = load_document(rule_path);
      if (cx->parsed() || erm->parsed()) job.config["class"] = load_document(class_path);
      if (!bayes_path.empty()) job.config["bayes"] = load_document(bayes_path);
      if (risk->parsed()) {
        job.command = "risk";
      } else if (dec->parsed()) {
        job.command = "decompose";
        if (!table_csv.empty()) extra["table"] = table_csv;
      } else if (cx->parsed()) {
        job.command = "complexity";
        job.config["seed"] = seed.value_or(1);
        job.config["options"] = {{"reps", reps.value_or(50)},
                                 {"delta", delta.value_or(0.1)},
                                 {"include_diagonal", include_diagonal}};
        if (!values_csv.empty()) extra["values"] = values_csv;
      } else {
        job.command = "erm";
        job.config["options"] = {{"per_rule", per_rule}};
      }
      return finish_single(job, out_path, extra, threads, out);
    }
    for (auto* s : studies) {
      if (!s->parsed()) continue;
      job.command = "experiment " + s->get_name();
      job.config = load_document(config_path);
      if (job.config.contains("study") && job.config["study"] != s->get_name()) {
        throw ValidationError(fmt::format("{} is a {} config, not {}", config_path, job.config["study"].dump(),
                                          s->get_name()));
      }
      if (seed) job.config["seed"] = *seed;
      if (reps) job.config["reps"] = *reps;
      if (delta) job.config["delta"] = *delta;
      if (epsilon) job.config["epsilon"] = *epsilon;
      return finish_experiment(job, out_dir, threads, out);
    }
    return replay(manifest_path, out_dir, threads, out);
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "error: malformed document: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace urank::cli
