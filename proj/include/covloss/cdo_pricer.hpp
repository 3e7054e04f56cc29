#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "covloss/risk_measures.hpp"

namespace covloss {

/// One CDO reference obligor.
struct ObligorSpec {
  double notional = 0.0;  // N_i >= 0
  double recovery = 0.0;  // R_i in [0,1]
  double lambda = 0.0;    // default intensity per year

  /// Loss given default (1 - R_i) N_i.
  double lgd() const { return (1.0 - recovery) * notional; }
  void validate() const;

  static ObligorSpec from_table(double notional, double recovery_pct, double lambda_pct) {
    return {notional, recovery_pct * 1e-2, lambda_pct * 1e-2};
  }
};

/// L_max = sum of loss given default.
double max_loss(std::span<const ObligorSpec> obligors);

enum class TrancheKind { equity, senior, mezzanine };

const char* to_string(TrancheKind kind);

/// Tranche bounds in currency units.
struct TrancheSpec {
  TrancheKind kind = TrancheKind::equity;
  double attachment = 0.0;  // A (0 for equity)
  double detachment = 0.0;  // B (L_max for senior)
  double spread = 0.10;     // per year
  std::size_t n_coupons = 1;
  double maturity = 5.0;

  /// equity: 0 < B <= L_max; senior: 0 <= A < L_max; mezzanine: 0 < A < B < L_max.
  void validate(double l_max) const;

  static TrancheSpec equity(double detachment, double spread, std::size_t n_coupons, double maturity);
  static TrancheSpec senior(double attachment, double l_max, double spread, std::size_t n_coupons,
                            double maturity);
  static TrancheSpec mezzanine(double attachment, double detachment, double spread, std::size_t n_coupons,
                               double maturity);
};

class TrancheError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// t_k = k T / K, k = 1..K.
std::vector<double> payment_dates(double maturity, std::size_t n_coupons);

/// B_i(t_k) = F^{-1}(1 - gamma_i(t_k)), gamma_i(t) = 1 - exp(-lambda_i t), with
/// F the Student-t(nu) CDF. +inf marks an obligor that cannot default by t_k.
class ThresholdTable {
 public:
  ThresholdTable(std::size_t n_obligors, std::size_t n_dates)
      : n_obligors_(n_obligors), n_dates_(n_dates), values_(n_obligors * n_dates) {}

  std::size_t n_obligors() const { return n_obligors_; }
  std::size_t n_dates() const { return n_dates_; }
  double& at(std::size_t obligor, std::size_t date) { return values_[obligor * n_dates_ + date]; }
  double at(std::size_t obligor, std::size_t date) const { return values_[obligor * n_dates_ + date]; }

 private:
  std::size_t n_obligors_;
  std::size_t n_dates_;
  std::vector<double> values_;
};

ThresholdTable default_thresholds(std::span<const ObligorSpec> obligors, std::span<const double> dates, double nu);

/// Raw draws of the single-factor latent model; reused across correlation
/// cells for common random numbers.
struct CdoDraws {
  std::size_t n_paths = 0;
  std::size_t n_obligors = 0;
  std::vector<double> sqrt_k;
  std::vector<double> t_common;
  std::vector<double> t_idio;  // path-major
};

CdoDraws draw_cdo_factors(std::size_t n_obligors, std::size_t n_paths, std::uint64_t seed, double nu);

/// Cumulative portfolio loss L(t_k) per path and payment date.
class LossPaths {
 public:
  LossPaths(std::size_t n_paths, std::vector<double> dates, double l_max)
      : n_paths_(n_paths), dates_(std::move(dates)), l_max_(l_max), loss_(n_paths_ * dates_.size(), 0.0) {}

  std::size_t n_paths() const { return n_paths_; }
  std::size_t n_dates() const { return dates_.size(); }
  std::span<const double> dates() const { return dates_; }
  double l_max() const { return l_max_; }
  double at(std::size_t path, std::size_t date) const { return loss_[path * dates_.size() + date]; }
  double terminal(std::size_t path) const { return loss_[path * dates_.size() + dates_.size() - 1]; }
  std::span<const double> path(std::size_t p) const { return {loss_.data() + p * dates_.size(), dates_.size()}; }

 private:
  friend LossPaths loss_paths_from_draws(std::span<const ObligorSpec>, const ThresholdTable&, const CdoDraws&,
                                         double, std::vector<double>);
  std::size_t n_paths_;
  std::vector<double> dates_;
  double l_max_;
  std::vector<double> loss_;
};

/// X_i = sqrt(K) (sqrt(rho) T + sqrt(1 - rho) T_i), L(t_k) = sum_i L_i 1{X_i >= B_i(t_k)}.
LossPaths loss_paths_from_draws(std::span<const ObligorSpec> obligors, const ThresholdTable& thresholds,
                                const CdoDraws& draws, double rho, std::vector<double> dates);

LossPaths simulate_loss_paths(std::span<const ObligorSpec> obligors, double rho, double nu,
                              std::span<const double> dates, std::size_t n_paths, std::uint64_t seed);

struct LegPrices {
  Estimate default_leg;
  Estimate payment_leg;
};

/// Zero-rate expected default and payment legs; the payment schedule is the
/// loss-path date grid and must have tranche.n_coupons dates ending at maturity.
LegPrices price_legs(const LossPaths& paths, const TrancheSpec& tranche);

/// Monte Carlo E[L(T)] with its path standard error.
Estimate expected_terminal_loss(const LossPaths& paths);

/// sum_i L_i (1 - exp(-lambda_i T)), free of the dependence structure.
double expected_loss_closed_form(std::span<const ObligorSpec> obligors, double horizon);

/// Put-call parity E[(B - L)^+] = E[(L - B)^+] + B - E[L] evaluated on
/// pooled path averages at every payment date; returns the largest relative
/// residual.
double parity_residual(const LossPaths& paths, double strike);

enum class LegKind { default_leg, payment_leg };
enum class SweepAxis { correlation, attachment };

/// One monotonicity assertion: direction +1 means nondecreasing, -1 nonincreasing.
struct SignCheck {
  TrancheKind kind = TrancheKind::equity;
  LegKind leg = LegKind::default_leg;
  SweepAxis axis = SweepAxis::correlation;
  int direction = 0;
  double worst_increment = 0.0;  // signed increment with the least slack
  double std_error = 0.0;        // combined stderr of that increment
  std::string worst_pair;
  std::size_t comparisons = 0;
  bool pass = true;
};

struct CdoCell {
  double rho = 0.0;
  std::vector<LegPrices> legs;  // one per tranche
  Estimate expected_loss;
  double parity_residual = 0.0;  // max over equity detachments
};

struct CdoSweepResult {
  std::vector<TrancheSpec> tranches;
  std::vector<CdoCell> cells;
  std::vector<SignCheck> checks;
  double l_max = 0.0;
  double expected_loss_closed_form = 0.0;
  bool pass = true;
};

/// Prices every tranche at every correlation with common random numbers and
/// checks: equity default leg nonincreasing and payment leg nondecreasing in
/// rho, senior legs the reverse; equity legs nondecreasing in B and senior
/// legs nonincreasing in A. Mezzanine tranches are priced without a check.
/// An increment passes when it is within k_sigma combined standard errors of
/// the expected sign.
CdoSweepResult correlation_sweep(std::span<const ObligorSpec> obligors, const std::vector<TrancheSpec>& tranches,
                                 std::span<const double> rho_grid, double nu, std::size_t n_paths,
                                 std::uint64_t seed, double k_sigma = 3.0);

}  // namespace covloss
