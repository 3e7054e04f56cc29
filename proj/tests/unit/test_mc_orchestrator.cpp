#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "covloss/mc_orchestrator.hpp"

using namespace covloss;

namespace {

const std::string kConfigs = COVLOSS_CONFIG_DIR;

CcpRunConfig small_config(const char* file = "ccp_members.json") {
  auto c = parse_ccp_config(read_json_file(kConfigs + "/" + file));
  c.n_paths = 4000;
  c.n_batches = 10;
  return c;
}

std::string csv_of(const SweepResult& s) {
  std::ostringstream os;
  write_sweep_csv(os, s);
  return os.str();
}

RiskReport report_with_cecl(double v, double se) {
  RiskReport r;
  r.cecl = {v, se};
  r.ec = {10.0 + v, se};
  r.ec_minus_cecl = {10.0, se};
  return r;
}

// 1 x 3 grid along rho_wwr with one member.
SweepResult synthetic(std::vector<std::pair<double, double>> cecl) {
  SweepResult s;
  s.rho_cr_axis = {0.1};
  s.members = {0};
  for (std::size_t k = 0; k < cecl.size(); ++k) {
    s.rho_wwr_axis.push_back(0.1 * static_cast<double>(k + 1));
    SweepCell c;
    c.rho_cr = 0.1;
    c.rho_wwr = s.rho_wwr_axis.back();
    c.valid = true;
    c.reports = {report_with_cecl(cecl[k].first, cecl[k].second)};
    s.cells.push_back(c);
  }
  return s;
}

const MonotonicityEntry& entry(const MonotonicityReport& r, Axis a, Metric m) {
  for (const auto& e : r.entries) {
    if (e.axis == a && e.metric == m) return e;
  }
  throw std::runtime_error("missing entry");
}

}  // namespace

TEST_CASE("small sweep is deterministic and keeps invalid cells") {
  const auto c = small_config();
  const std::vector<double> cr = {0.2, 0.5}, wwr = {0.1, 0.6};
  std::size_t calls = 0, last_total = 0;
  const auto a = run_sweep(c, cr, wwr, [&](std::size_t, std::size_t total) {
    ++calls;
    last_total = total;
  });
  const auto b = run_sweep(c, cr, wwr);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(calls > 0);
  CHECK(last_total == 3);

  REQUIRE(a.cells.size() == 4);
  CHECK(a.valid_cells() == 3);
  CHECK_FALSE(a.at(1, 1).valid);
  CHECK_FALSE(a.at(1, 1).reason.empty());
  CHECK(a.at(1, 1).reports.empty());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.at(0, i).valid);
    REQUIRE(a.at(0, i).reports.size() == 3);
    for (const auto& r : a.at(0, i).reports) {
      CHECK(r.cecl.value >= 0.0);
      CHECK(r.ec.value >= r.var.value);
      CHECK(r.n_paths == 4000);
    }
  }

  const auto csv = csv_of(a);
  CHECK(csv.rfind("# schema=covloss.ccp_sweep/1 config_hash=", 0) == 0);
  CHECK(csv.find("\nrho_cr,rho_wwr,member,cecl,cecl_se,ec,ec_se,var,valid,ec_minus_cecl,ec_minus_cecl_se\n") !=
        std::string::npos);
  CHECK(csv.find("0.5,0.6,0,,,,,,0,,\n") != std::string::npos);

  auto reseeded = c;
  reseeded.seed += 1;
  CHECK(csv_of(run_sweep(reseeded, cr, wwr)) != csv_of(a));
}

TEST_CASE("single cell equals the corresponding sweep cell") {
  auto c = small_config();
  c.model.rho_cr = 0.35;
  c.model.rho_wwr = 0.25;
  const auto one = run_cell(c);
  const auto grid = run_sweep(c, {0.2, 0.35}, {0.25});
  REQUIRE(one.cells.size() == 1);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(one.cells[0].reports[r].cecl.value == grid.at(1, 0).reports[r].cecl.value);
    CHECK(one.cells[0].reports[r].ec.value == grid.at(1, 0).reports[r].ec.value);
  }
}

TEST_CASE("raw draws are shared by every cell") {
  const auto c = small_config();
  const auto d1 = draw_sweep_factors(c);
  const auto d2 = draw_sweep_factors(c);
  REQUIRE(d1.size() == c.n_batches);
  CHECK(d1[3].t_common == d2[3].t_common);
  CHECK(d1[3].w_idio == d2[3].w_idio);
  CHECK(d1[0].t_common != d1[1].t_common);
}

TEST_CASE("sweep errors") {
  const auto c = small_config();
  CHECK_THROWS_AS(run_sweep(c, {0.95}, {0.95}), SweepError);
  auto zero = c;
  zero.report_members = {0, 99};
  CHECK_THROWS(run_sweep(zero, {0.2}, {0.2}));
}

TEST_CASE("no defaults give zero loss") {
  const auto c = small_config("ccp_no_default.json");
  const auto s = run_sweep(c, {0.3}, {0.3});
  for (const auto& r : s.at(0, 0).reports) {
    CHECK(r.cecl.value == 0.0);
    CHECK(r.ec.value == 0.0);
    CHECK(r.n_survivors == 4000);
  }
  CHECK(std::isinf(s.setup.thresholds[0]));
  const auto j = risk_report_json(s);
  CHECK(j.at("clearing").at("members")[0].at("threshold") == "inf");
}

TEST_CASE("monotonicity rule") {
  auto ok = synthetic({{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}});
  auto rep = check_monotonicity(ok, 2.0);
  CHECK(rep.pass);
  CHECK(rep.comparisons == 6);
  CHECK(entry(rep, Axis::rho_wwr, Metric::cecl).min_increment == 1.0);

  // a drop of 10 with per-cell se 1 sits far beyond 2 * sqrt(2)
  auto bad = synthetic({{20.0, 1.0}, {10.0, 1.0}, {11.0, 1.0}});
  rep = check_monotonicity(bad, 2.0);
  CHECK_FALSE(rep.pass);
  const auto& e = entry(rep, Axis::rho_wwr, Metric::cecl);
  CHECK_FALSE(e.pass);
  CHECK(e.worst_increment == -10.0);
  CHECK(e.worst_se == doctest::Approx(std::sqrt(2.0)));
  CHECK(e.worst_from.i_wwr == 0);
  CHECK(e.worst_to.i_wwr == 1);
  CHECK(entry(rep, Axis::rho_wwr, Metric::ec_minus_cecl).pass);

  // within noise
  auto noisy = synthetic({{10.0, 1.0}, {8.0, 1.0}, {9.0, 1.0}});
  CHECK(check_monotonicity(noisy, 2.0).pass);
  CHECK_FALSE(check_monotonicity(noisy, 1.0).pass);

  auto gap = synthetic({{1.0, 0.1}, {0.0, 0.1}, {2.0, 0.1}});
  gap.cells[1].valid = false;
  gap.cells[1].reports.clear();
  CHECK_THROWS_AS(check_monotonicity(gap, 3.0), SweepError);

  const auto j = monotonicity_json(bad, check_monotonicity(bad, 2.0));
  CHECK(j.at("schema") == kMonotonicitySchema);
  CHECK(j.at("pass") == false);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(0.05 + 18 * 0.05) != "0.95");
  CHECK(format_number(-2.5e-7) == "-2.5e-07");
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  for (double v : {1.0 / 3.0, 1e300, 6.02214076e23, -0.0078125}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("tranche layout") {
  const auto c = parse_cdo_config(read_json_file(kConfigs + "/cdo_portfolio.json"));
  const auto t = tranches_of(c);
  CHECK(t.size() == c.equity_detachments.values().size() + c.senior_attachments.values().size() + 3);
}
