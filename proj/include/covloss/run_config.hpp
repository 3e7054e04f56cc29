#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "covloss/ccp_market.hpp"
#include "covloss/cdo_pricer.hpp"
#include "covloss/elliptical_factors.hpp"
#include "covloss/risk_measures.hpp"

namespace covloss {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evenly spaced values start, start + step, ..., stop (inclusive).
struct AxisRange {
  double start = 0.05;
  double stop = 0.95;
  double step = 0.05;

  /// Values snapped to a 1e-12 lattice so that 0.05 + 18 * 0.05 prints as 0.95.
  std::vector<double> values() const;
};

struct CcpRunConfig {
  FactorModel model;  // rho_cr / rho_wwr give the single-cell defaults
  double days_per_year = 252.0;
  double mpor_days = 2.0;
  double liquidation_days = 5.0;
  AxisRange rho_cr_grid;
  AxisRange rho_wwr_grid;
  std::vector<MemberSpec> members;
  MarginSpec margin;
  DfAllocation df_allocation = DfAllocation::sloim_proportional;
  double ec_alpha = 0.9975;
  std::size_t n_paths = 200'000;
  std::size_t n_batches = 100;
  std::uint64_t seed = 1;
  std::vector<std::size_t> report_members{0, 5, 10};
  double k_sigma = 3.0;
  BatchMode batch_mode = BatchMode::pooled;
  WeightNormalization normalization = WeightNormalization::self_normalized;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
  RiskOptions risk_options() const { return {ec_alpha, n_batches, batch_mode, normalization}; }
};

struct CdoRunConfig {
  std::vector<ObligorSpec> obligors;
  double nu = 5.0;
  double maturity = 5.0;
  std::size_t n_coupons = 1;
  double spread = 0.10;
  AxisRange rho_grid;
  AxisRange equity_detachments;  // fractions of L_max
  AxisRange senior_attachments;  // fractions of L_max
  std::vector<std::pair<double, double>> mezzanine;  // (A, B) fractions of L_max
  std::size_t n_paths = 200'000;
  std::uint64_t seed = 1;
  double k_sigma = 3.0;

  void validate() const;
};

CcpRunConfig parse_ccp_config(const nlohmann::json& doc);
CdoRunConfig parse_cdo_config(const nlohmann::json& doc);

/// Reads and parses a JSON file; missing files and syntax errors raise
/// ConfigError naming the path.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Effective configuration, including defaults and overrides, as canonical JSON.
nlohmann::json to_json(const CcpRunConfig& config);
nlohmann::json to_json(const CdoRunConfig& config);

/// SHA-1 of "blob <len>\0<content>", i.e. the git object id of the content.
std::string git_blob_hash(const std::string& content);

/// git_blob_hash of the canonical JSON dump.
std::string config_hash(const nlohmann::json& effective);

}  // namespace covloss
