#include "covloss/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "covloss/mc_orchestrator.hpp"
#include "covloss/property_suites.hpp"
#include "covloss/run_config.hpp"

namespace covloss {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> batches;
  std::optional<std::string> out;
  std::vector<std::size_t> members;
  std::optional<double> k_sigma;
  std::optional<double> rho_cr;
  std::optional<double> rho_wwr;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json parse_text(const std::string& text, const fs::path& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

CcpRunConfig load_ccp(const Overrides& o, std::string& input_hash) {
  const std::string text = read_text(o.config);
  input_hash = git_blob_hash(text);
  CcpRunConfig c = parse_ccp_config(parse_text(text, o.config));
  if (o.seed) c.seed = *o.seed;
  if (o.paths) c.n_paths = *o.paths;
  if (o.batches) c.n_batches = *o.batches;
  if (!o.members.empty()) c.report_members = o.members;
  if (o.k_sigma) c.k_sigma = *o.k_sigma;
  if (o.rho_cr) c.model.rho_cr = *o.rho_cr;
  if (o.rho_wwr) c.model.rho_wwr = *o.rho_wwr;
  c.validate();
  return c;
}

CdoRunConfig load_cdo(const Overrides& o, std::string& input_hash) {
  const std::string text = read_text(o.config);
  input_hash = git_blob_hash(text);
  CdoRunConfig c = parse_cdo_config(parse_text(text, o.config));
  if (o.seed) c.seed = *o.seed;
  if (o.paths) c.n_paths = *o.paths;
  if (o.k_sigma) c.k_sigma = *o.k_sigma;
  c.validate();
  return c;
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw ConfigError("write failed for '" + path.string() + "'");
}

int ccp_sweep(const Overrides& o, std::ostream& out, std::ostream& err) {
  std::string input_hash;
  const CcpRunConfig c = load_ccp(o, input_hash);
  const fs::path dir = prepare_out(o.out.value_or("out"));
  std::size_t last_decile = 0;
  SweepResult sweep = run_sweep(c, [&](std::size_t done, std::size_t total) {
    const std::size_t decile = done * 10 / total;
    if (decile != last_decile) {
      last_decile = decile;
      err << "cells " << done << "/" << total << '\n';
    }
  });
  sweep.provenance.input_hash = input_hash;
  const MonotonicityReport report = check_monotonicity(sweep, c.k_sigma);

  std::ostringstream csv;
  write_sweep_csv(csv, sweep);
  write_file(dir / "ccp_sweep.csv", csv.str());
  write_file(dir / "ccp_monotonicity.json", monotonicity_json(sweep, report).dump(2) + "\n");

  for (const auto& e : report.entries) {
    out << (e.pass ? "PASS " : "FAIL ") << "member " << e.member << ' ' << to_string(e.axis) << ' '
        << to_string(e.metric) << " worst increment " << format_number(e.worst_increment) << " se "
        << format_number(e.worst_se) << '\n';
  }
  out << "valid cells " << sweep.valid_cells() << "/" << sweep.cells.size() << ", monotonicity "
      << (report.pass ? "pass" : "FAIL") << '\n';
  return report.pass ? kExitOk : kExitCheckFailed;
}

int cdo_sweep(const Overrides& o, std::ostream& out) {
  std::string input_hash;
  const CdoRunConfig c = load_cdo(o, input_hash);
  const fs::path dir = prepare_out(o.out.value_or("out"));
  const CdoSweepResult sweep = run_cdo_sweep(c);
  const Provenance prov{c.seed, config_hash(to_json(c)), input_hash};

  std::ostringstream csv;
  write_cdo_csv(csv, sweep, prov);
  write_file(dir / "cdo_sweep.csv", csv.str());
  write_file(dir / "cdo_checks.json", cdo_checks_json(sweep, prov, c.k_sigma).dump(2) + "\n");

  for (const auto& chk : sweep.checks) {
    out << (chk.pass ? "PASS " : "FAIL ") << to_string(chk.kind) << ' '
        << (chk.leg == LegKind::default_leg ? "default" : "payment") << " leg along "
        << (chk.axis == SweepAxis::correlation ? "rho" : "attachment") << ", worst " << chk.worst_pair << '\n';
  }
  out << "cdo sign pattern " << (sweep.pass ? "pass" : "FAIL") << '\n';
  return sweep.pass ? kExitOk : kExitCheckFailed;
}

int risk_report_cmd(const Overrides& o, std::ostream& out) {
  std::string input_hash;
  const CcpRunConfig c = load_ccp(o, input_hash);
  SweepResult sweep = run_cell(c);
  sweep.provenance.input_hash = input_hash;
  const std::string doc = risk_report_json(sweep).dump(2) + "\n";
  if (o.out) write_file(prepare_out(*o.out) / "risk_report.json", doc);
  out << doc;
  return kExitOk;
}

int check_properties(const Overrides& o, std::ostream& out) {
  sm::SuiteOptions opts;
  if (o.seed) opts.seed = *o.seed;
  const auto outcomes = sm::run_property_suites(opts);
  bool ok = true;
  json rows = json::array();
  for (const auto& s : outcomes) {
    ok = ok && s.ok();
    out << (s.ok() ? "PASS " : "FAIL ") << s.name << " (expected " << (s.expected_pass ? "pass" : "fail")
        << ", min difference " << format_number(s.min_difference) << ", " << s.evaluations << " evaluations)\n";
    rows.push_back({{"name", s.name},
                    {"expected_pass", s.expected_pass},
                    {"observed_pass", s.observed_pass},
                    {"min_difference", s.min_difference},
                    {"evaluations", s.evaluations}});
  }
  if (o.out) {
    const json doc = {{"schema", "covloss.properties/1"}, {"seed", opts.seed}, {"pass", ok}, {"suites", rows}};
    write_file(prepare_out(*o.out) / "properties.json", doc.dump(2) + "\n");
  }
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Credit loss Monte Carlo engine", "covloss"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", o.config, "JSON run configuration");
    if (needs_config) cfg->required();
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--k-sigma", o.k_sigma, "monotonicity tolerance in standard errors")->check(CLI::NonNegativeNumber);
  };
  auto add_mc = [&](CLI::App* sub) {
    sub->add_option("--paths", o.paths, "Monte Carlo paths");
  };
  auto add_ccp = [&](CLI::App* sub) {
    sub->add_option("--batches", o.batches, "batches for standard errors");
    sub->add_option("--members", o.members, "reference members, comma separated")->delimiter(',');
  };

  auto* ccp = app.add_subcommand("ccp-sweep", "correlation sweep of CECL and EC with monotonicity report");
  add_common(ccp, true);
  add_mc(ccp);
  add_ccp(ccp);
  auto* cdo = app.add_subcommand("cdo-sweep", "CDO tranche legs along the correlation grid");
  add_common(cdo, true);
  add_mc(cdo);
  auto* risk = app.add_subcommand("risk-report", "CECL, EC and VaR at one correlation cell");
  add_common(risk, true);
  add_mc(risk);
  add_ccp(risk);
  risk->add_option("--rho-cr", o.rho_cr, "credit factor correlation");
  risk->add_option("--rho-wwr", o.rho_wwr, "wrong-way correlation");
  auto* props = app.add_subcommand("check-properties", "grid certificates for supermodularity and monotonicity");
  add_common(props, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (ccp->parsed()) return ccp_sweep(o, out, err);
    if (cdo->parsed()) return cdo_sweep(o, out);
    if (risk->parsed()) return risk_report_cmd(o, out);
    return check_properties(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const SweepError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace covloss
