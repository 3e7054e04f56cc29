#include "covloss/mc_orchestrator.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>

#include "covloss/loss_engine.hpp"
#include "covloss/parallel.hpp"

namespace covloss {

using nlohmann::json;

std::size_t SweepResult::valid_cells() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.valid ? 1 : 0;
  return n;
}

std::vector<RawDraws> draw_sweep_factors(const CcpRunConfig& config) {
  std::vector<RawDraws> draws(config.n_batches);
  parallel_for(config.n_batches, [&](std::size_t b) {
    const auto [begin, end] = batch_bounds(config.n_paths, config.n_batches, b);
    draws[b] = draw_factors(config.members.size(), end - begin,
                            RngStream{config.seed, static_cast<std::uint32_t>(b)}, config.model.nu);
  });
  return draws;
}

namespace {

void run_valid_cell(const CcpRunConfig& config, const FactorModel& model, const ClearingSetup& setup,
                    const std::vector<RawDraws>& draws, SweepCell& cell) {
  const auto& refs = config.report_members;
  const std::size_t n = config.n_paths;
  std::vector<std::vector<double>> loss(refs.size(), std::vector<double>(n));
  std::vector<std::vector<double>> x_ref(refs.size(), std::vector<double>(n));
  for (std::size_t b = 0; b < draws.size(); ++b) {
    const std::size_t offset = batch_bounds(n, config.n_batches, b).first;
    const ScenarioBatch batch = assemble_batch(model, config.members, draws[b]);
    for (std::size_t r = 0; r < refs.size(); ++r) {
      const LossVector lv = member_loss(batch, setup, refs[r]);
      for (std::size_t p = 0; p < batch.n_paths(); ++p) {
        loss[r][offset + p] = lv.total[p];
        x_ref[r][offset + p] = batch.x(p, refs[r]);
      }
    }
  }
  const RiskOptions options = config.risk_options();
  cell.reports.reserve(refs.size());
  for (std::size_t r = 0; r < refs.size(); ++r) {
    cell.reports.push_back(
        risk_report(loss[r], x_ref[r], setup.thresholds[refs[r]], setup.gamma(refs[r]), options));
  }
}

}  // namespace

SweepResult run_sweep(const CcpRunConfig& config, const std::vector<double>& rho_cr_axis,
                      const std::vector<double>& rho_wwr_axis, const ProgressFn& progress) {
  config.validate();
  SweepResult result;
  result.rho_cr_axis = rho_cr_axis;
  result.rho_wwr_axis = rho_wwr_axis;
  result.members = config.report_members;
  result.n_paths = config.n_paths;
  result.n_batches = config.n_batches;
  result.provenance.seed = config.seed;
  result.provenance.config_hash = config_hash(to_json(config));
  result.setup = compute_cover2_and_df(config.members, config.margin, config.model, config.df_allocation);
  for (std::size_t r : config.report_members) {
    if (!(result.setup.df[r] > 0.0)) {
      throw SweepError("report member " + std::to_string(r) + " has no default fund contribution");
    }
  }

  for (double cr : rho_cr_axis) {
    for (double wwr : rho_wwr_axis) {
      SweepCell cell;
      cell.rho_cr = cr;
      cell.rho_wwr = wwr;
      FactorModel m = config.model;
      m.rho_cr = cr;
      m.rho_wwr = wwr;
      const ValidityVerdict v = validate_model(m);
      cell.valid = v.valid;
      cell.reason = v.reason;
      result.cells.push_back(std::move(cell));
    }
  }
  std::vector<std::size_t> todo;
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    if (result.cells[c].valid) todo.push_back(c);
  }
  if (todo.empty()) throw SweepError("no valid grid cell");

  const std::vector<RawDraws> draws = draw_sweep_factors(config);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(todo.size(), [&](std::size_t k) {
    SweepCell& cell = result.cells[todo[k]];
    FactorModel m = config.model;
    m.rho_cr = cell.rho_cr;
    m.rho_wwr = cell.rho_wwr;
    run_valid_cell(config, m, result.setup, draws, cell);
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(finished, todo.size());
    }
  });
  return result;
}

SweepResult run_sweep(const CcpRunConfig& config, const ProgressFn& progress) {
  return run_sweep(config, config.rho_cr_grid.values(), config.rho_wwr_grid.values(), progress);
}

SweepResult run_cell(const CcpRunConfig& config) {
  return run_sweep(config, {config.model.rho_cr}, {config.model.rho_wwr});
}

const char* to_string(Metric m) {
  switch (m) {
    case Metric::cecl: return "cecl";
    case Metric::ec: return "ec";
    case Metric::ec_minus_cecl: return "ec_minus_cecl";
  }
  return "?";
}

const char* to_string(Axis a) { return a == Axis::rho_cr ? "rho_cr" : "rho_wwr"; }

Estimate metric_of(const RiskReport& report, Metric m) {
  switch (m) {
    case Metric::cecl: return report.cecl;
    case Metric::ec: return report.ec;
    case Metric::ec_minus_cecl: return report.ec_minus_cecl;
  }
  return {};
}

MonotonicityReport check_monotonicity(const SweepResult& sweep, double k_sigma) {
  MonotonicityReport report;
  report.k_sigma = k_sigma;
  const std::size_t n_cr = sweep.rho_cr_axis.size();
  const std::size_t n_wwr = sweep.rho_wwr_axis.size();
  for (std::size_t r = 0; r < sweep.members.size(); ++r) {
    for (Axis axis : {Axis::rho_cr, Axis::rho_wwr}) {
      for (Metric metric : {Metric::cecl, Metric::ec, Metric::ec_minus_cecl}) {
        MonotonicityEntry e;
        e.member = sweep.members[r];
        e.axis = axis;
        e.metric = metric;
        double min_slack = std::numeric_limits<double>::infinity();
        double min_inc = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_cr; ++i) {
          for (std::size_t j = 0; j < n_wwr; ++j) {
            const CellIndex lo{i, j};
            const CellIndex hi = axis == Axis::rho_cr ? CellIndex{i + 1, j} : CellIndex{i, j + 1};
            if (hi.i_cr >= n_cr || hi.i_wwr >= n_wwr) continue;
            const SweepCell& a = sweep.at(lo.i_cr, lo.i_wwr);
            const SweepCell& b = sweep.at(hi.i_cr, hi.i_wwr);
            if (!a.valid || !b.valid) continue;
            const Estimate ea = metric_of(a.reports[r], metric);
            const Estimate eb = metric_of(b.reports[r], metric);
            const double inc = eb.value - ea.value;
            const double se = std::hypot(ea.std_error, eb.std_error);
            const double slack = inc + k_sigma * se;
            ++e.comparisons;
            if (inc < min_inc) {
              min_inc = inc;
              e.min_increment = inc;
              e.min_increment_se = se;
            }
            if (slack < min_slack) {
              min_slack = slack;
              e.worst_increment = inc;
              e.worst_se = se;
              e.worst_from = lo;
              e.worst_to = hi;
            }
          }
        }
        if (e.comparisons == 0) continue;
        e.pass = e.worst_increment >= -k_sigma * e.worst_se;
        report.pass = report.pass && e.pass;
        report.comparisons += e.comparisons;
        report.entries.push_back(e);
      }
    }
  }
  if (report.comparisons == 0) throw SweepError("no axis-adjacent pair of valid cells");
  return report;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "# schema=" << kSweepCsvSchema << " config_hash=" << sweep.provenance.config_hash
      << " seed=" << sweep.provenance.seed << '\n';
  out << "rho_cr,rho_wwr,member,cecl,cecl_se,ec,ec_se,var,valid,ec_minus_cecl,ec_minus_cecl_se\n";
  for (const auto& cell : sweep.cells) {
    for (std::size_t r = 0; r < sweep.members.size(); ++r) {
      out << format_number(cell.rho_cr) << ',' << format_number(cell.rho_wwr) << ',' << sweep.members[r] << ',';
      if (!cell.valid) {
        out << ",,,,,0,,\n";
        continue;
      }
      const RiskReport& rep = cell.reports[r];
      out << format_number(rep.cecl.value) << ',' << format_number(rep.cecl.std_error) << ','
          << format_number(rep.ec.value) << ',' << format_number(rep.ec.std_error) << ','
          << format_number(rep.var.value) << ",1," << format_number(rep.ec_minus_cecl.value) << ','
          << format_number(rep.ec_minus_cecl.std_error) << '\n';
    }
  }
}

namespace {

json provenance_json(const SweepResult& sweep) {
  json p = {{"seed", sweep.provenance.seed},
            {"config_hash", sweep.provenance.config_hash},
            {"n_paths", sweep.n_paths},
            {"n_batches", sweep.n_batches}};
  if (!sweep.provenance.input_hash.empty()) p["input_hash"] = sweep.provenance.input_hash;
  return p;
}

json setup_json(const ClearingSetup& s) {
  json members = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    members.push_back({{"id", i},
                       {"im", s.im[i]},
                       {"sloim", s.sloim[i]},
                       {"df", s.df[i]},
                       {"threshold", format_number(s.thresholds[i])},
                       {"default_prob", s.default_prob[i]}});
  }
  return {{"cover2", s.cover2}, {"members", members}};
}

json cell_json(const CellIndex& c, const SweepResult& sweep) {
  return {{"rho_cr", sweep.rho_cr_axis[c.i_cr]}, {"rho_wwr", sweep.rho_wwr_axis[c.i_wwr]}};
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"std_error", e.std_error}}; }

}  // namespace

json monotonicity_json(const SweepResult& sweep, const MonotonicityReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"member", e.member},
                       {"axis", to_string(e.axis)},
                       {"metric", to_string(e.metric)},
                       {"comparisons", e.comparisons},
                       {"min_increment", e.min_increment},
                       {"min_increment_se", e.min_increment_se},
                       {"worst_increment", e.worst_increment},
                       {"worst_se", e.worst_se},
                       {"worst_pair", {cell_json(e.worst_from, sweep), cell_json(e.worst_to, sweep)}},
                       {"pass", e.pass}});
  }
  json invalid = json::array();
  for (const auto& c : sweep.cells) {
    if (!c.valid) invalid.push_back({{"rho_cr", c.rho_cr}, {"rho_wwr", c.rho_wwr}, {"reason", c.reason}});
  }
  return {{"schema", kMonotonicitySchema},
          {"provenance", provenance_json(sweep)},
          {"k_sigma", report.k_sigma},
          {"rule", "increment >= -k_sigma * sqrt(se_low^2 + se_high^2)"},
          {"pass", report.pass},
          {"comparisons", report.comparisons},
          {"valid_cells", sweep.valid_cells()},
          {"invalid_cells", invalid},
          {"clearing", setup_json(sweep.setup)},
          {"entries", entries}};
}

json risk_report_json(const SweepResult& sweep) {
  json cells = json::array();
  for (const auto& c : sweep.cells) {
    json cj = {{"rho_cr", c.rho_cr}, {"rho_wwr", c.rho_wwr}, {"valid", c.valid}};
    if (!c.valid) {
      cj["reason"] = c.reason;
    } else {
      json reports = json::array();
      for (std::size_t r = 0; r < sweep.members.size(); ++r) {
        const RiskReport& rep = c.reports[r];
        reports.push_back({{"member", sweep.members[r]},
                           {"cecl", estimate_json(rep.cecl)},
                           {"ec", estimate_json(rep.ec)},
                           {"var", estimate_json(rep.var)},
                           {"ec_minus_cecl", estimate_json(rep.ec_minus_cecl)},
                           {"alpha", rep.alpha},
                           {"n_survivors", rep.n_survivors}});
      }
      cj["reports"] = reports;
    }
    cells.push_back(cj);
  }
  return {{"schema", "covloss.risk_report/1"},
          {"provenance", provenance_json(sweep)},
          {"clearing", setup_json(sweep.setup)},
          {"cells", cells}};
}

}  // namespace covloss

namespace covloss {

std::vector<TrancheSpec> tranches_of(const CdoRunConfig& config) {
  const double l_max = max_loss(config.obligors);
  std::vector<TrancheSpec> t;
  for (double b : config.equity_detachments.values()) {
    t.push_back(TrancheSpec::equity(b * l_max, config.spread, config.n_coupons, config.maturity));
  }
  for (double a : config.senior_attachments.values()) {
    t.push_back(TrancheSpec::senior(a * l_max, l_max, config.spread, config.n_coupons, config.maturity));
  }
  for (const auto& [a, b] : config.mezzanine) {
    t.push_back(TrancheSpec::mezzanine(a * l_max, b * l_max, config.spread, config.n_coupons, config.maturity));
  }
  return t;
}

CdoSweepResult run_cdo_sweep(const CdoRunConfig& config) {
  config.validate();
  if (!(max_loss(config.obligors) > 0.0)) throw ConfigError("portfolio has no loss given default");
  return correlation_sweep(config.obligors, tranches_of(config), config.rho_grid.values(), config.nu,
                           config.n_paths, config.seed, config.k_sigma);
}

void write_cdo_csv(std::ostream& out, const CdoSweepResult& sweep, const Provenance& provenance) {
  out << "# schema=" << kCdoCsvSchema << " config_hash=" << provenance.config_hash << " seed=" << provenance.seed
      << '\n';
  out << "tranche,kind,A,B,rho,default_leg,payment_leg,default_leg_se,payment_leg_se\n";
  for (std::size_t t = 0; t < sweep.tranches.size(); ++t) {
    const TrancheSpec& tr = sweep.tranches[t];
    for (const auto& cell : sweep.cells) {
      const LegPrices& lp = cell.legs[t];
      out << t << ',' << to_string(tr.kind) << ',' << format_number(tr.attachment / sweep.l_max) << ','
          << format_number(tr.detachment / sweep.l_max) << ',' << format_number(cell.rho) << ','
          << format_number(lp.default_leg.value) << ',' << format_number(lp.payment_leg.value) << ','
          << format_number(lp.default_leg.std_error) << ',' << format_number(lp.payment_leg.std_error) << '\n';
    }
  }
}

json cdo_checks_json(const CdoSweepResult& sweep, const Provenance& provenance, double k_sigma) {
  json checks = json::array();
  for (const auto& c : sweep.checks) {
    checks.push_back({{"kind", to_string(c.kind)},
                      {"leg", c.leg == LegKind::default_leg ? "default" : "payment"},
                      {"axis", c.axis == SweepAxis::correlation ? "rho" : "attachment"},
                      {"direction", c.direction > 0 ? "nondecreasing" : "nonincreasing"},
                      {"comparisons", c.comparisons},
                      {"worst_increment", c.worst_increment},
                      {"worst_se", c.std_error},
                      {"worst_pair", c.worst_pair},
                      {"pass", c.pass}});
  }
  json cells = json::array();
  for (const auto& cell : sweep.cells) {
    cells.push_back({{"rho", cell.rho},
                     {"expected_loss", cell.expected_loss.value},
                     {"expected_loss_se", cell.expected_loss.std_error},
                     {"parity_residual", cell.parity_residual}});
  }
  return {{"schema", kCdoChecksSchema},
          {"provenance", {{"seed", provenance.seed}, {"config_hash", provenance.config_hash},
                          {"input_hash", provenance.input_hash}}},
          {"k_sigma", k_sigma},
          {"l_max", sweep.l_max},
          {"expected_loss_closed_form", sweep.expected_loss_closed_form},
          {"pass", sweep.pass},
          {"checks", checks},
          {"cells", cells}};
}

}  // namespace covloss
