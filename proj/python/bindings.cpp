#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "urank/cli.hpp"
#include "urank/complexity.hpp"
#include "urank/erm.hpp"
#include "urank/experiments.hpp"
#include "urank/hoeffding.hpp"
#include "urank/io.hpp"

namespace py = pybind11;
using namespace urank;
using io::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

LabeledSample to_sample(const Array& x, const Array& y) {
  if (y.ndim() != 1) throw ValidationError("y must be one-dimensional");
  const auto n = static_cast<std::size_t>(y.shape(0));
  std::size_t dim = 1;
  if (x.ndim() == 2) {
    dim = static_cast<std::size_t>(x.shape(1));
  } else if (x.ndim() != 1) {
    throw ValidationError("x must be one- or two-dimensional");
  }
  if (static_cast<std::size_t>(x.shape(0)) != n) throw ValidationError("x and y have different lengths");
  return LabeledSample(dim, std::vector<double>(x.data(), x.data() + n * dim),
                       std::vector<double>(y.data(), y.data() + n));
}

json parse(const std::string& text, const char* what) { return io::parse_json(text, what); }

Oracle to_oracle(const std::string& text) { return io::oracle_from_json(parse(text, "oracle")); }

std::string empirical_risk_json(const Array& x, const Array& y, const std::string& rule, unsigned threads) {
  return io::to_json(empirical_risk(to_sample(x, y), io::rule_from_json(parse(rule, "rule")), threads)).dump();
}

std::string decompose_json(const Array& x, const Array& y, const std::string& rule, const std::string& oracle,
                           unsigned threads) {
  const Oracle o = to_oracle(oracle);
  const RankingRule bayes = io::oracle_bayes(o);
  const RankingRule r = io::rule_from_json(parse(rule, "rule"), &bayes);
  return io::to_json(decompose(to_sample(x, y), r, bayes, o, threads)).dump();
}

std::string bound_report_json(const Array& x, const Array& y, const std::string& cls, const std::string& oracle,
                              double delta, std::size_t reps, std::uint64_t seed, unsigned threads) {
  const Oracle o = to_oracle(oracle);
  const RankingRule bayes = io::oracle_bayes(o);
  const auto spec = io::class_from_json(parse(cls, "class"), &bayes);
  if (!spec.rules) throw ValidationError("the class must list its rules");
  const auto tables = class_tables(to_sample(x, y), *spec.rules, bayes, o, threads);
  return io::to_json(bound_report(tables, delta, reps, seed, false, threads)).dump();
}

std::string erm_json(const Array& x, const Array& y, const std::string& cls, unsigned threads) {
  const auto s = to_sample(x, y);
  const auto spec = io::class_from_json(parse(cls, "class"));
  if (spec.family) return io::to_json(erm_threshold_scan(s, *spec.family)).dump();
  return io::to_json(erm_exhaustive(s, *spec.rules, false, threads)).dump();
}

py::tuple draw(const std::string& model, std::size_t n, std::uint64_t seed) {
  const json doc = parse(model, "model");
  const LabeledSample s = doc.value("type", "") == "discrete" ? sample(io::distribution_from_json(doc), n, seed)
                                                               : sample(io::model_from_json(doc), n, seed);
  Array x({s.size(), s.dim()});
  Array y(s.size());
  std::copy(s.xs().begin(), s.xs().end(), x.mutable_data());
  std::copy(s.ys().begin(), s.ys().end(), y.mutable_data());
  return py::make_tuple(x, y);
}

std::string experiment_json(const std::string& study, const std::string& config, unsigned threads) {
  ExperimentConfig c = io::config_from_json(parse(config, "config"));
  c.threads = threads;
  if (study == "wn-decay") return io::to_json(wn_decay_study(c)).dump();
  if (study == "rate") return io::to_json(excess_risk_rate_study(c)).dump();
  if (study == "coverage") return io::to_json(coverage_study(c)).dump();
  if (study == "variance") {
    if (!c.oracle || !c.rules) throw ValidationError("the variance study needs an oracle and a rule class");
    return io::to_json(variance_condition_study(*c.rules, *c.oracle, c.alpha_grid)).dump();
  }
  throw ValidationError("unknown study \"" + study + "\"");
}

py::tuple run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run(std::move(args), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_urank, m) {
  m.doc() = "Native core of the urank package; documents are passed as JSON text.";
  m.attr("__version__") = URANK_VERSION;
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("empirical_risk", &empirical_risk_json, py::arg("x"), py::arg("y"), py::arg("rule"), py::arg("threads") = 1);
  m.def("decompose", &decompose_json, py::arg("x"), py::arg("y"), py::arg("rule"), py::arg("oracle"),
        py::arg("threads") = 1);
  m.def("bound_report", &bound_report_json, py::arg("x"), py::arg("y"), py::arg("cls"), py::arg("oracle"),
        py::arg("delta") = 0.1, py::arg("reps") = 50, py::arg("seed") = 1, py::arg("threads") = 1);
  m.def("erm", &erm_json, py::arg("x"), py::arg("y"), py::arg("cls"), py::arg("threads") = 1);
  m.def("sample", &draw, py::arg("model"), py::arg("n"), py::arg("seed"));
  m.def("experiment", &experiment_json, py::arg("study"), py::arg("config"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("run_cli", &run_cli, py::arg("args"));
}
