#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "covloss/ccp_market.hpp"
#include "covloss/elliptical_factors.hpp"

namespace covloss {

/// Default-fund allocation weight of member i:
///   1{x_i >= B_i} / (1 + sum_j beta_j 1{x_j < B_j}).
/// The denominator counts survivors (x_j < B_j). Ties x_i == B_i count as
/// default. Result lies in [0,1] for nonnegative betas.
double allocation_coefficient(std::size_t i, std::span<const double> x, std::span<const double> betas,
                              std::span<const double> thresholds);

/// Per-path credit loss, optionally with per-member contributions.
struct LossVector {
  std::vector<double> total;
  std::size_t n_members = 0;
  std::vector<double> contributions;  // path-major, empty unless requested

  std::size_t n_paths() const { return total.size(); }
  double contribution(std::size_t path, std::size_t member) const {
    return contributions[path * n_members + member];
  }
};

/// CCP member loss of the reference member r:
///   sum_{i != r} 1{X_i >= B_i} / (1 + sum_{j != r} (DF_j / DF_r) 1{X_j < B_j})
///                * (Y_i - IM_i - DF_i)^+
LossVector member_loss(const ScenarioBatch& batch, const ClearingSetup& setup, std::size_t reference = 0,
                       bool keep_contributions = false);

/// Pluggable loss l(x, y) = sum_i f_i(x) g_i(y_i) over the listed members.
struct LossSpec {
  std::function<double(std::size_t i, std::span<const double> x)> allocation;
  std::function<double(std::size_t i, double y)> severity;
  std::vector<std::size_t> members;  // indices i in the sum
};

/// The CCP specialisation as a LossSpec; generic_loss on it reproduces
/// member_loss bit for bit.
LossSpec ccp_loss_spec(const ClearingSetup& setup, std::size_t reference = 0);

/// Loss whose terms apply allocation f_i = 1{x_i >= B_i} and severity
/// g_i(y) = (y - m_i)^+ to every listed member, without sharing.
LossSpec bilateral_loss_spec(std::vector<double> thresholds, std::vector<double> collateral);

LossVector generic_loss(const ScenarioBatch& batch, const LossSpec& spec, bool keep_contributions = false);

}  // namespace covloss
