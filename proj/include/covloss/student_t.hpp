#pragma once

#include <limits>

namespace covloss::dist {

/// Degrees of freedom standing for the Gaussian limit of the Student-t family.
inline constexpr double kGaussianNu = std::numeric_limits<double>::infinity();

inline bool is_gaussian(double nu) { return nu == kGaussianNu; }

/// Standard Student-t(nu) CDF; nu = +inf gives the standard normal.
double t_cdf(double x, double nu);

/// Inverse of t_cdf for p in (0,1). Throws std::domain_error outside (0,1)
/// or for nu <= 0.
double t_quantile(double p, double nu);

/// Upper-tail quantile t^{-1}(1 - q), evaluated without forming 1 - q.
/// Returns +inf for q == 0.
double t_upper_quantile(double q, double nu);

}  // namespace covloss::dist
