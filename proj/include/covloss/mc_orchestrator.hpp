#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "covloss/ccp_market.hpp"
#include "covloss/cdo_pricer.hpp"
#include "covloss/elliptical_factors.hpp"
#include "covloss/risk_measures.hpp"
#include "covloss/run_config.hpp"

namespace covloss {

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepCell {
  double rho_cr = 0.0;
  double rho_wwr = 0.0;
  bool valid = false;
  std::string reason;               // violated constraint when invalid
  std::vector<RiskReport> reports;  // aligned with SweepResult::members
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;  // hash of the effective configuration
  std::string input_hash;   // hash of the raw config file, when read from disk
};

struct SweepResult {
  std::vector<double> rho_cr_axis;
  std::vector<double> rho_wwr_axis;
  std::vector<SweepCell> cells;  // rho_cr-major
  std::vector<std::size_t> members;
  ClearingSetup setup;
  Provenance provenance;
  std::size_t n_paths = 0;
  std::size_t n_batches = 0;

  const SweepCell& at(std::size_t i_cr, std::size_t i_wwr) const {
    return cells[i_cr * rho_wwr_axis.size() + i_wwr];
  }
  std::size_t valid_cells() const;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Raw factor draws of every batch of a run. Batch b covers the paths
/// batch_bounds(n_paths, n_batches, b) and uses substream (seed, b, path).
std::vector<RawDraws> draw_sweep_factors(const CcpRunConfig& config);

/// Sweeps the configured grid. Margins are computed once; every cell
/// re-assembles the same raw draws, so cells differ only in their loadings.
/// Invalid cells are kept with their reason. Throws SweepError when no cell
/// is valid.
SweepResult run_sweep(const CcpRunConfig& config, const ProgressFn& progress = {});

/// Same as run_sweep on explicit axis values.
SweepResult run_sweep(const CcpRunConfig& config, const std::vector<double>& rho_cr_axis,
                      const std::vector<double>& rho_wwr_axis, const ProgressFn& progress = {});

/// One cell at config.model.rho_cr, config.model.rho_wwr.
SweepResult run_cell(const CcpRunConfig& config);

enum class Metric { cecl, ec, ec_minus_cecl };
enum class Axis { rho_cr, rho_wwr };

const char* to_string(Metric m);
const char* to_string(Axis a);

/// Metric value and its batch standard error.
Estimate metric_of(const RiskReport& report, Metric m);

struct CellIndex {
  std::size_t i_cr = 0;
  std::size_t i_wwr = 0;
};

struct MonotonicityEntry {
  std::size_t member = 0;
  Axis axis = Axis::rho_cr;
  Metric metric = Metric::cecl;
  double min_increment = 0.0;
  double min_increment_se = 0.0;
  // pair with the least slack increment + k_sigma * se
  double worst_increment = 0.0;
  double worst_se = 0.0;
  CellIndex worst_from;
  CellIndex worst_to;
  std::size_t comparisons = 0;
  bool pass = true;
};

struct MonotonicityReport {
  double k_sigma = 3.0;
  std::vector<MonotonicityEntry> entries;
  std::size_t comparisons = 0;
  bool pass = true;
};

/// For every axis-adjacent pair of valid cells, increment = metric at the
/// higher rho minus metric at the lower; the pair passes when
/// increment >= -k_sigma * sqrt(se_low^2 + se_high^2). Throws SweepError when
/// no pair is comparable.
MonotonicityReport check_monotonicity(const SweepResult& sweep, double k_sigma = 3.0);

inline constexpr const char* kSweepCsvSchema = "covloss.ccp_sweep/1";
inline constexpr const char* kMonotonicitySchema = "covloss.ccp_monotonicity/1";

/// Columns: rho_cr, rho_wwr, member, cecl, cecl_se, ec, ec_se, var, valid,
/// ec_minus_cecl, ec_minus_cecl_se. Invalid cells leave the numbers empty.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

nlohmann::json monotonicity_json(const SweepResult& sweep, const MonotonicityReport& report);
nlohmann::json risk_report_json(const SweepResult& sweep);

/// Equity tranches per detachment, senior per attachment, then mezzanine
/// pairs; fractions of L_max converted to currency.
std::vector<TrancheSpec> tranches_of(const CdoRunConfig& config);

CdoSweepResult run_cdo_sweep(const CdoRunConfig& config);

inline constexpr const char* kCdoCsvSchema = "covloss.cdo_sweep/1";
inline constexpr const char* kCdoChecksSchema = "covloss.cdo_checks/1";

/// Columns: tranche, kind, A, B, rho, default_leg, payment_leg,
/// default_leg_se, payment_leg_se, with A and B as fractions of L_max.
void write_cdo_csv(std::ostream& out, const CdoSweepResult& sweep, const Provenance& provenance);

nlohmann::json cdo_checks_json(const CdoSweepResult& sweep, const Provenance& provenance, double k_sigma);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace covloss
