// Runs every acceptance check and prints one PASS/FAIL line per check.
// Exit status is the number of failed checks.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "../support.hpp"
#include "urank/cli.hpp"
#include "urank/complexity.hpp"
#include "urank/erm.hpp"
#include "urank/hoeffding.hpp"
#include "urank/io.hpp"

namespace fs = std::filesystem;
using namespace urank;
using io::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Instance {
  DiscreteDistribution dist;
  RankingRule bayes;
  RankingRule rule;
};

Instance random_instance(CounterRng& rng, int trial) {
  auto d = testing::random_distribution(rng, 2 + trial % 7);
  auto bayes = bayes_rule(d);
  return {std::move(d), std::move(bayes), testing::random_threshold_rule(rng, "r")};
}

Outcome identity_residual() {
  CounterRng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = random_instance(rng, trial);
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 199);
    const auto s = sample(inst.dist, n, derive_seed(101, n, trial));
    worst = std::max(worst, std::abs(decompose(s, inst.rule, inst.bayes, inst.dist).residual()));
  }
  return {worst < 1e-12, fmt::format("max |residual| = {:.3e} over 100 instances", worst)};
}

Outcome degeneracy() {
  CounterRng rng(202);
  double worst_cond = 0.0, worst_mean = 0.0, worst_loss = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = random_instance(rng, trial);
    const auto& d = inst.dist;
    const Oracle o = d;
    double mean_h = 0.0, mean_l = 0.0;
    for (std::size_t a = 0; a < d.size(); ++a) {
      const Observation za{d.x(a), d.y(a)};
      mean_h += d.prob(a) * h_projection(inst.rule, inst.bayes, za, o);
      mean_l += d.prob(a) * pointwise_loss_l(inst.rule, za, o);
      double cond = 0.0;
      for (std::size_t b = 0; b < d.size(); ++b) {
        cond += d.prob(b) * degenerate_kernel(inst.rule, inst.bayes, za, {d.x(b), d.y(b)}, o);
      }
      worst_cond = std::max(worst_cond, std::abs(cond));
    }
    worst_mean = std::max(worst_mean, std::abs(mean_h));
    worst_loss = std::max(worst_loss, std::abs(mean_l - true_risk(inst.rule, d)));
  }
  const bool pass = worst_cond < 1e-12 && worst_mean < 1e-12 && worst_loss < 1e-12;
  return {pass, fmt::format("max |E[hhat|Z]| = {:.2e}, |E h| = {:.2e}, |E l - L| = {:.2e}", worst_cond, worst_mean,
                            worst_loss)};
}

Outcome fast_matches_naive() {
  CounterRng rng(303);
  const auto rule = RankingRule::scorer("id", ScalarFn::linear({1.0}));
  int mismatches = 0;
  for (int k = 0; k < 500; ++k) {
    const auto n = static_cast<std::size_t>(std::llround(2.0 * std::pow(5000.0, k / 499.0)));
    const auto s = testing::random_tie_free(rng, n);
    const auto fast = empirical_risk_fast(s, rule);
    if (!fast || !(*fast == empirical_risk_naive(s, rule))) ++mismatches;
  }
  using clock = std::chrono::steady_clock;
  const auto big = testing::random_tie_free(rng, 100000);
  auto t0 = clock::now();
  const auto fast = empirical_risk_fast(big, rule);
  const double fast_s = std::chrono::duration<double>(clock::now() - t0).count();
  const auto mid = testing::random_tie_free(rng, 10000);
  t0 = clock::now();
  empirical_risk_naive(mid, rule);
  const double naive_s = 100.0 * std::chrono::duration<double>(clock::now() - t0).count();
  std::ostringstream info;
  info << fmt::format("{} mismatches in 500 samples (n = 2..10000); info: fast n=1e5 {:.3f}s, naive n=1e5 "
                      "(extrapolated from 1e4) {:.1f}s, speedup {:.0f}x",
                      mismatches, fast_s, naive_s, naive_s / fast_s);
  return {mismatches == 0 && fast.has_value(), info.str()};
}

double grid_sup(const std::vector<double>& g) {
  constexpr double deg = std::numbers::pi / 180.0;
  double best = -INFINITY;
  if (g.size() == 2) {
    for (int a = 0; a < 360; ++a) best = std::max(best, g[0] * std::cos(a * deg) + g[1] * std::sin(a * deg));
    return best;
  }
  for (int t = 0; t <= 180; ++t) {
    for (int p = 0; p < 360; ++p) {
      best = std::max(best, g[0] * std::sin(t * deg) * std::cos(p * deg) +
                                g[1] * std::sin(t * deg) * std::sin(p * deg) + g[2] * std::cos(t * deg));
    }
  }
  return best;
}

Outcome u_closed_form() {
  CounterRng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_instance(rng, trial);
    std::vector<RankingRule> rules{inst.rule, testing::random_threshold_rule(rng, "a"),
                                   testing::random_threshold_rule(rng, "b")};
    const RuleClass cls(rules);
    const std::size_t n = 2 + trial % 2;
    const auto s = sample(inst.dist, n, derive_seed(404, n, trial));
    const auto tables = class_tables(s, cls, inst.bayes, inst.dist);
    const auto eps = draw_rademacher(n, trial);
    double grid = 0.0;
    for (const auto& t : tables) grid = std::max(grid, grid_sup(column_sums(t, eps)));
    worst = std::max(worst, std::abs(u_chaos(tables, eps) - grid));
  }
  return {worst < 1e-3, fmt::format("max |U - grid| = {:.2e} over 50 instances (n <= 3)", worst)};
}

Outcome scan_matches_exhaustive() {
  CounterRng rng(909);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 59);
    std::vector<double> xs(n), ys(n);
    for (auto& x : xs) x = trial % 2 ? rng.normal() : std::floor(rng.uniform() * 6);
    for (auto& y : ys) y = std::floor(rng.uniform() * 4);
    const auto s = LabeledSample::from_scalar(xs, ys);
    const ThresholdFamily fam{trial % 3 ? ThresholdKind::shift : ThresholdKind::step, 40.0};
    const auto scan = erm_threshold_scan(s, fam);
    const auto ex = erm_exhaustive(s, induced_class(s, fam));
    if (scan.min_risk != ex.min_risk || scan.minimizer.id() != ex.minimizer.id()) ++mismatches;
  }
  return {mismatches == 0, fmt::format("{} mismatches in 100 instances (risk and minimizer id)", mismatches)};
}

// CLI runs shared by the study checks and the replay check.
struct Runs {
  fs::path root;
  bool ok = false;
  std::string detail;
};

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << err.str();
  return code;
}

const std::vector<std::pair<std::string, std::string>> kStudies{{"wn-decay", "wn_decay.json"},
                                                                 {"coverage", "coverage.json"},
                                                                 {"variance", "variance.json"},
                                                                 {"rate", "rate_binary.json"},
                                                                 {"rate", "rate_gaussian.json"}};

std::string run_name(const std::pair<std::string, std::string>& s) { return fs::path(s.second).stem().string(); }

Runs run_studies() {
  Runs runs;
  runs.root = fs::temp_directory_path() / "urank_acceptance";
  fs::remove_all(runs.root);
  int failures = 0;
  std::string diffs;
  for (const auto& study : kStudies) {
    const fs::path first = runs.root / run_name(study) / "threads8";
    const std::string config = (fs::path(URANK_CONFIG_DIR) / study.second).string();
    if (run_cli({"experiment", study.first, "--config", config, "--out-dir", first.string(), "--threads", "8"}) != 0) {
      ++failures;
      continue;
    }
    for (const char* threads : {"1", "8"}) {
      const fs::path again = runs.root / run_name(study) / (std::string("replay") + threads);
      std::string text;
      const int code = run_cli({"replay", "--manifest", (first / "manifest.json").string(), "--out-dir",
                                again.string(), "--threads", threads},
                               &text);
      bool same = code == 0;
      for (const char* f : {"results.csv", "plot.dat", "summary.json", "manifest.json"}) {
        same = same && io::read_text(first / f) == io::read_text(again / f);
      }
      if (!same) {
        ++failures;
        diffs += fmt::format(" {}@{}", run_name(study), threads);
      }
    }
  }
  runs.ok = failures == 0;
  runs.detail = failures == 0 ? "5 experiments run at 8 threads, replayed at 1 and 8 threads: byte-identical"
                              : fmt::format("{} failures:{}", failures, diffs);
  return runs;
}

json summary_of(const Runs& runs, const std::string& name) {
  return io::read_json(runs.root / name / "threads8" / "summary.json");
}

Outcome wn_decay(const Runs& runs) {
  const json s = summary_of(runs, "wn_decay");
  const double slope = s["fit"]["slope"].get<double>();
  const double t_slope = s["companion_fit"]["slope"].get<double>();
  const bool pass = slope >= -1.25 && slope <= -0.75 && t_slope >= -0.65 && t_slope <= -0.35;
  return {pass, fmt::format("sup|W_n| slope {:.4f} (need [-1.25, -0.75]), sup|T_n| slope {:.4f} (need [-0.65, "
                            "-0.35])",
                            slope, t_slope)};
}

Outcome coverage(const Runs& runs) {
  const json s = summary_of(runs, "coverage");
  const double cov = s["coverage"].get<double>();
  const double threshold = 0.9 - 3.0 * std::sqrt(0.09 / 500.0);
  return {cov >= threshold, fmt::format("held-out coverage {:.4f} at C = {:.4g} (need >= {:.4f})", cov,
                                        s["fitted_c"].get<double>(), threshold)};
}

Outcome variance(const Runs& runs) {
  const json s = summary_of(runs, "variance");
  bool feasible = false;
  for (const auto& f : s["fits"]) {
    if (f["alpha"].get<double>() == 1.0) feasible = f["feasible"].get<bool>();
  }
  std::string best = s["best"].is_null() ? "none" : s["best"]["alpha"].dump();
  return {feasible, fmt::format("alpha = 1 feasible: {} (largest feasible alpha {})", feasible, best)};
}

Outcome rate(const Runs& runs) {
  bool pass = true;
  std::string detail;
  for (const char* name : {"rate_binary", "rate_gaussian"}) {
    const json s = summary_of(runs, name);
    const double slope = s["fit"]["slope"].get<double>();
    bool monotone = true;
    for (std::size_t k = 1; k < s["summary"].size(); ++k) {
      monotone = monotone && s["summary"][k]["mean"].get<double>() <= s["summary"][k - 1]["mean"].get<double>();
    }
    pass = pass && slope >= -1.15 && slope <= -0.6 && monotone;
    detail += fmt::format("{}: slope {:.4f}, monotone {}; ", name, slope, monotone);
  }
  detail += "need slopes in [-1.15, -0.6]";
  return {pass, detail};
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("[{}] criterion {:2d} {}: {}", o.pass ? "PASS" : "FAIL", id, name, o.detail)
              << std::endl;
  };
  report(1, "decomposition identity", identity_residual);
  report(2, "degeneracy and centring", degeneracy);
  report(3, "fast risk equals naive", fast_matches_naive);
  report(4, "closed-form U", u_closed_form);
  Runs runs;
  try {
    runs = run_studies();
  } catch (const std::exception& e) {
    runs.detail = fmt::format("threw: {}", e.what());
  }
  report(5, "W_n decay", [&] { return wn_decay(runs); });
  report(6, "bound coverage", [&] { return coverage(runs); });
  report(7, "variance condition", [&] { return variance(runs); });
  report(8, "excess-risk rate", [&] { return rate(runs); });
  report(9, "threshold scan equals exhaustive", scan_matches_exhaustive);
  report(10, "replay determinism", [&] { return Outcome{runs.ok, runs.detail}; });
  std::cout << fmt::format("{} of 10 criteria passed", 10 - failed) << std::endl;
  return failed;
}
