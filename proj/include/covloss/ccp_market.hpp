#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "covloss/elliptical_factors.hpp"
#include "covloss/member.hpp"

namespace covloss {

/// IM and stressed-loss quantile levels, 1/2 < alpha_im < alpha_stress < 1.
struct MarginSpec {
  double alpha_im = 0.95;
  double alpha_stress = 0.97;

  void validate() const;
};

enum class DfAllocation {
  sloim_proportional,  // DF_i = SLOIM_i / sum SLOIM * Cover2
  im_proportional,     // DF_i = IM_i / sum IM * Cover2
};

class ClearingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Margin stack of a CCP: initial margins, stressed losses over IM,
/// default fund and default thresholds, one entry per member.
struct ClearingSetup {
  std::vector<double> im;
  std::vector<double> sloim;
  std::vector<double> df;
  double cover2 = 0.0;
  std::vector<double> thresholds;    // B_i = t_nu^{-1}(1 - DP_i(T)); +inf if DP_i = 0
  std::vector<double> default_prob;  // DP_i(T) = 1 - exp(-lambda_i T)

  std::size_t size() const { return im.size(); }
  /// Collateral m_i = IM_i + DF_i.
  double collateral(std::size_t i) const { return im[i] + df[i]; }
  /// gamma = DP_r(T), the default probability of reference member r.
  double gamma(std::size_t reference) const { return default_prob.at(reference); }
  /// beta_j = DF_j / DF_r for j != r and beta_r = 0, so that the
  /// reference member never enters its own allocation denominator.
  /// Throws ClearingError when DF_r = 0.
  std::vector<double> betas(std::size_t reference) const;
};

/// |nom| sigma sqrt(delta_s) t_nu^{-1}(alpha_im).
double compute_im(const MemberSpec& member, const MarginSpec& margin, const FactorModel& model);

/// |nom| sigma sqrt(delta_s) (t_nu^{-1}(alpha_stress) - t_nu^{-1}(alpha_im)); throws
/// when alpha_stress <= alpha_im.
double compute_sloim(const MemberSpec& member, const MarginSpec& margin, const FactorModel& model);

/// Default probability over [0, T] from a constant intensity.
double default_probability(double lambda, double horizon);

/// t_nu^{-1}(1 - DP), +inf when DP = 0.
double default_threshold(double lambda, double horizon, double nu);

/// Cover2 from the two largest SLOIMs, allocated across members. Requires at
/// least two members with positive SLOIM.
ClearingSetup compute_cover2_and_df(MemberUniverse members, const MarginSpec& margin,
                                    const FactorModel& model,
                                    DfAllocation rule = DfAllocation::sloim_proportional);

/// Sum of nominals is zero within 1e-9 * max|nom|. Empty sets pass.
ValidityVerdict check_clearing_condition(MemberUniverse members);

}  // namespace covloss
