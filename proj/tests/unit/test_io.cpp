#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support.hpp"
#include "urank/io.hpp"

using namespace urank;
using io::json;

TEST_CASE("sample CSV round trip is bit-exact") {
  CounterRng rng(3);
  std::vector<double> xs(60), ys(30);
  for (auto& x : xs) x = rng.normal() * std::pow(10.0, rng.uniform(-20, 20));
  for (auto& y : ys) y = rng.uniform() / 3.0;
  const LabeledSample s(2, xs, ys);
  const std::string text = io::sample_csv(s);
  CHECK(text.rfind("x0,x1,y\n", 0) == 0);
  CHECK(io::parse_sample_csv(text) == s);
}

TEST_CASE("sample CSV errors") {
  CHECK_THROWS_AS(io::parse_sample_csv(""), ValidationError);
  CHECK_THROWS_AS(io::parse_sample_csv("a,y\n1,2\n2,3\n"), ValidationError);
  CHECK_THROWS_AS(io::parse_sample_csv("x0,y\n1,2\n2\n"), ValidationError);
  CHECK_THROWS_AS(io::parse_sample_csv("x0,y\n1,2\n2,zz\n"), ValidationError);
  CHECK_THROWS_AS(io::parse_sample_csv("x0,y\n1,2\n"), ValidationError);  // n < 2
  const auto s = io::parse_sample_csv("x0,y\r\n1, 2\r\n\r\n3,4\r\n");
  CHECK(s.size() == 2);
  CHECK(s.y(1) == 4.0);
  CHECK_THROWS_AS(io::read_sample_csv("/nonexistent/sample.csv"), io::IoError);
}

TEST_CASE("functions and rules round trip") {
  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& fn : {ScalarFn::constant(0.5), ScalarFn::linear({1.0, -2.0}, 0.25), ScalarFn::logistic({3.0}),
                         ScalarFn::step(-inf), ScalarFn::shift(inf, 4.0), ScalarFn::shift(0.1, 2.0, 1)}) {
    const json doc = io::to_json(fn);
    const ScalarFn back = io::scalar_fn_from_json(json::parse(doc.dump()));
    CHECK(io::to_json(back) == doc);
  }
  CHECK(io::to_json(ScalarFn::step(-inf))["theta"] == "-inf");
  CHECK_THROWS_AS(io::to_json(ScalarFn::custom([](std::span<const double>) { return 0.0; }, "c")), ValidationError);

  const auto table = RankingRule::table("t", 1, {{0.0}, {1.0}}, {1, -1, 1, 1}).negated("nt");
  const auto back = io::rule_from_json(json::parse(io::to_json(table).dump()));
  CHECK(back.id() == "nt");
  const std::vector<double> a{0.0}, b{1.0};
  CHECK(back(a, b) == table(a, b));
  CHECK(back(b, a) == table(b, a));
  const auto scorer = RankingRule::scorer("s", ScalarFn::shift(0.5, 3.0)).negated("ns");
  CHECK(io::to_json(io::rule_from_json(io::to_json(scorer))) == io::to_json(scorer));

  const auto bayes = RankingRule::scorer("bayes", ScalarFn::linear({1.0}));
  CHECK(io::rule_from_json({{"type", "bayes"}}, &bayes).id() == "bayes");
  CHECK(io::rule_from_json({{"type", "bayes"}, {"negated", true}}, &bayes).id() == "-bayes");
  CHECK_THROWS_AS(io::rule_from_json({{"type", "bayes"}}), ValidationError);
  CHECK_THROWS_AS(io::rule_from_json({{"type", "nope"}}), ValidationError);
  CHECK_THROWS_AS(io::rule_from_json({{"type", "scorer"}, {"id", "x"}}), ValidationError);
}

TEST_CASE("class documents") {
  const auto bayes = RankingRule::scorer("bayes", ScalarFn::linear({1.0}));
  const json grid = {{"threshold_grid", {{"kind", "step"}, {"lo", 0.0}, {"hi", 1.0}, {"count", 11}}}};
  const auto spec = io::class_from_json(grid);
  REQUIRE(spec.rules.has_value());
  CHECK(spec.rules->size() == 11);
  CHECK(spec.rules->vc_dim() == 1);
  CHECK((*spec.rules)[10].scorer_fn()->theta() == 1.0);

  json both = grid;
  both["include_bayes"] = true;
  both["threshold_grid"] = json::array({grid["threshold_grid"], {{"kind", "shift"}, {"thetas", {0.5}}, {"period", 3}}});
  const auto spec2 = io::class_from_json(both, &bayes);
  CHECK(spec2.rules->size() == 13);
  CHECK_FALSE(spec2.rules->vc_dim().has_value());

  const auto fam = io::class_from_json({{"family", {{"kind", "shift"}, {"period", 5}}}});
  REQUIRE(fam.family.has_value());
  CHECK(fam.family->kind == ThresholdKind::shift);
  CHECK(fam.family->period == 5.0);

  CHECK_THROWS_AS(io::class_from_json(json::object()), ValidationError);
  CHECK_THROWS_AS(io::class_from_json({{"family", {{"kind", "shift"}}}, {"include_bayes", true}}, &bayes),
                  ValidationError);
  CHECK_THROWS_AS(io::class_from_json({{"threshold_grid", {{"kind", "diagonal"}, {"thetas", {1}}}}}),
                  ValidationError);
  CHECK_THROWS_AS(io::class_from_json({{"rules", json::array({io::to_json(bayes), io::to_json(bayes)})}}),
                  ValidationError);
  CHECK_THROWS_AS(io::class_from_json({{"rulez", 1}}), ValidationError);
}

TEST_CASE("models and distributions round trip") {
  const auto b = GenerativeModel::binary_eta(ScalarFn::linear({1.0}), {0.25, 0.75, 1}, 2.0);
  const auto g = GenerativeModel::gaussian(ScalarFn::linear({-1.0}), ScalarFn::constant(0.5));
  for (const auto& m : {b, g}) CHECK(io::to_json(io::model_from_json(io::to_json(m))) == io::to_json(m));
  CHECK(sample(io::model_from_json(io::to_json(b)), 20, 4) == sample(b, 20, 4));

  const DiscreteDistribution d(2, {0, 1, 2, 3}, {1, -1}, {0.25, 0.75});
  const auto back = io::distribution_from_json(json::parse(io::to_json(d).dump()));
  CHECK(back.size() == 2);
  CHECK(back.x(1)[1] == 3.0);
  CHECK(back.prob(1) == 0.75);
  CHECK_THROWS_AS(io::model_from_json({{"type", "poisson"}}), ValidationError);

  const Oracle o = io::oracle_from_json({{"type", "gaussian"},
                                         {"mean", {{"kind", "linear"}, {"weights", {1}}}},
                                         {"sigma", 0.5},
                                         {"mc_budget", 500},
                                         {"mc_seed", 3}});
  REQUIRE(std::holds_alternative<McOracle>(o));
  CHECK(std::get<McOracle>(o).budget == 500);
  CHECK(is_exact(io::oracle_from_json(io::to_json(d))));
}

TEST_CASE("experiment configs") {
  const json six = io::to_json(DiscreteDistribution(1, {0, 1}, {0, 1}, {0.5, 0.5}));
  const json doc = {{"schema_version", 1},
                    {"oracle", six},
                    {"class", {{"threshold_grid", {{"kind", "step"}, {"thetas", {0.5}}}}, {"include_bayes", true}}},
                    {"n_grid", {10, 20, 40}},
                    {"reps", 7},
                    {"seed", 18446744073709551615ull},
                    {"delta", 0.05}};
  const auto c = io::config_from_json(doc);
  CHECK(c.rules->size() == 2);
  CHECK(c.n_grid == std::vector<std::size_t>{10, 20, 40});
  CHECK(c.reps == 7);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.delta == 0.05);
  CHECK(c.epsilon == 0.1);

  json missing = doc;
  missing.erase("schema_version");
  CHECK_THROWS_AS(io::config_from_json(missing), ValidationError);
  json wrong = doc;
  wrong["schema_version"] = 2;
  CHECK_THROWS_AS(io::config_from_json(wrong), ValidationError);
  json unknown = doc;
  unknown["repz"] = 3;
  CHECK_THROWS_AS(io::config_from_json(unknown), ValidationError);
  json negative = doc;
  negative["reps"] = -1;
  CHECK_THROWS_AS(io::config_from_json(negative), ValidationError);
  CHECK_THROWS_AS(io::parse_json("{", "test"), ValidationError);
}

TEST_CASE("digests and numbers") {
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(io::number(-INFINITY) == "-inf");
  CHECK(io::to_number("inf", "t") == INFINITY);
  CHECK_THROWS_AS(io::to_number("many", "t"), ValidationError);
  // JSON doubles survive a round trip exactly.
  CounterRng rng(2);
  for (int k = 0; k < 100; ++k) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    CHECK(json::parse(json(v).dump()).get<double>() == v);
  }
}

TEST_CASE("result documents") {
  StudyResult r;
  r.name = "rate";
  r.value_label = "v";
  r.companion_label = "c";
  r.cells = {{10, 0, 5, 0.5, 0.25}};
  r.summary = {{10, 0.5, 0.1, 0.25, 0.05}};
  const std::string csv = io::study_csv(r);
  CHECK(csv == "row,n,rep,seed,value,companion,std_error,companion_std_error\n"
               "cell,10,0,5,0.5,0.25,,\n"
               "summary,10,,,0.5,0.25,0.10000000000000001,0.050000000000000003\n");
  CHECK(io::to_json(r)["fit"].is_null());
  VarianceStudy v;
  v.fits = {{1.0, INFINITY, false}};
  CHECK(io::to_json(v)["fits"][0]["c"] == "inf");
}
