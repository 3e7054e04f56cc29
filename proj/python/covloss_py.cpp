#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "covloss/ccp_market.hpp"
#include "covloss/cdo_pricer.hpp"
#include "covloss/cli.hpp"
#include "covloss/loss_engine.hpp"
#include "covloss/mc_orchestrator.hpp"
#include "covloss/risk_measures.hpp"
#include "covloss/run_config.hpp"
#include "covloss/student_t.hpp"
#include "covloss/supermodular_lab.hpp"

namespace py = pybind11;
using namespace covloss;

namespace {

WeightedSample sample_of(std::vector<double> values, std::optional<std::vector<double>> weights) {
  if (!weights) return WeightedSample::uniform(std::move(values));
  return WeightedSample::weighted(std::move(values), std::move(*weights));
}

py::tuple run_cli_captured(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

std::string sweep_json(const std::string& config_json, std::optional<std::vector<double>> rho_cr,
                       std::optional<std::vector<double>> rho_wwr) {
  const CcpRunConfig c = parse_ccp_config(nlohmann::json::parse(config_json));
  py::gil_scoped_release release;
  const SweepResult s = run_sweep(c, rho_cr.value_or(c.rho_cr_grid.values()),
                                  rho_wwr.value_or(c.rho_wwr_grid.values()));
  nlohmann::json doc = risk_report_json(s);
  try {
    doc["monotonicity"] = monotonicity_json(s, check_monotonicity(s, c.k_sigma));
  } catch (const SweepError&) {
    doc["monotonicity"] = nullptr;
  }
  return doc.dump();
}

std::string cell_json(const std::string& config_json) {
  const CcpRunConfig c = parse_ccp_config(nlohmann::json::parse(config_json));
  py::gil_scoped_release release;
  return risk_report_json(run_cell(c)).dump();
}

py::tuple scenarios(const std::string& config_json, std::size_t n_paths, std::uint32_t batch) {
  const CcpRunConfig c = parse_ccp_config(nlohmann::json::parse(config_json));
  const auto b = sample_batch(c.model, c.members, n_paths, {c.seed, batch});
  py::array_t<double> x({b.n_paths(), b.n_members()});
  py::array_t<double> y({b.n_paths(), b.n_members()});
  auto xm = x.mutable_unchecked<2>();
  auto ym = y.mutable_unchecked<2>();
  for (std::size_t p = 0; p < b.n_paths(); ++p) {
    for (std::size_t i = 0; i < b.n_members(); ++i) {
      xm(p, i) = b.x(p, i);
      ym(p, i) = b.y(p, i);
    }
  }
  return py::make_tuple(x, y);
}

py::dict margins(const std::string& config_json) {
  const CcpRunConfig c = parse_ccp_config(nlohmann::json::parse(config_json));
  const ClearingSetup s = compute_cover2_and_df(c.members, c.margin, c.model, c.df_allocation);
  py::dict d;
  d["im"] = s.im;
  d["sloim"] = s.sloim;
  d["df"] = s.df;
  d["cover2"] = s.cover2;
  d["thresholds"] = s.thresholds;
  d["default_prob"] = s.default_prob;
  return d;
}

py::dict increasing_differences(const std::function<double(std::vector<double>)>& f,
                                std::vector<std::vector<double>> axes, double tol) {
  const sm::RealFunction g = [&](std::span<const double> x) { return f({x.begin(), x.end()}); };
  const auto r = sm::check_increasing_differences(g, sm::GridSpec{std::move(axes)}, tol);
  py::dict d;
  d["passed"] = r.pass;
  d["min_difference"] = r.min_difference;
  d["evaluations"] = r.evaluations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_covloss, m) {
  m.doc() = "Credit loss Monte Carlo engine";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SweepError>(m, "SweepError", PyExc_ValueError);

  m.def("t_cdf", &dist::t_cdf, py::arg("x"), py::arg("nu"));
  m.def("t_quantile", &dist::t_quantile, py::arg("p"), py::arg("nu"));

  m.def(
      "empirical_var",
      [](std::vector<double> v, double alpha, std::optional<std::vector<double>> w) {
        return empirical_var(sample_of(std::move(v), std::move(w)), alpha);
      },
      py::arg("values"), py::arg("alpha"), py::arg("weights") = py::none());
  m.def(
      "expected_shortfall",
      [](std::vector<double> v, double alpha, std::optional<std::vector<double>> w) {
        return expected_shortfall(sample_of(std::move(v), std::move(w)), alpha);
      },
      py::arg("values"), py::arg("alpha"), py::arg("weights") = py::none());

  m.def(
      "allocation_coefficient",
      [](std::size_t i, std::vector<double> x, std::vector<double> betas, std::vector<double> thresholds) {
        return allocation_coefficient(i, x, betas, thresholds);
      },
      py::arg("i"), py::arg("x"), py::arg("betas"), py::arg("thresholds"));
  m.def("check_increasing_differences", &increasing_differences, py::arg("f"), py::arg("axes"),
        py::arg("tol") = 0.0);

  m.def("default_threshold", &default_threshold, py::arg("lambda_"), py::arg("horizon"), py::arg("nu"));
  m.def(
      "expected_loss_closed_form",
      [](const std::vector<std::tuple<double, double, double>>& obligors, double horizon) {
        std::vector<ObligorSpec> o;
        for (auto [n, r, l] : obligors) o.push_back({n, r, l});
        return expected_loss_closed_form(o, horizon);
      },
      py::arg("obligors"), py::arg("horizon"));

  m.def(
      "effective_ccp_config",
      [](const std::string& text) { return to_json(parse_ccp_config(nlohmann::json::parse(text))).dump(); },
      py::arg("config_json"));
  m.def("ccp_margins", &margins, py::arg("config_json"));
  m.def("sample_scenarios", &scenarios, py::arg("config_json"), py::arg("n_paths"), py::arg("batch") = 0);
  m.def("run_cell_json", &cell_json, py::arg("config_json"));
  m.def("run_sweep_json", &sweep_json, py::arg("config_json"), py::arg("rho_cr") = py::none(),
        py::arg("rho_wwr") = py::none());
  m.def("run_cli", &run_cli_captured, py::arg("args"));
}
