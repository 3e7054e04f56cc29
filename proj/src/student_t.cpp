#include "covloss/student_t.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace covloss::dist {

namespace {

void check_nu(double nu) {
  if (!(nu > 0.0)) {
    throw std::domain_error("degrees of freedom must be positive, got " + std::to_string(nu));
  }
}

}  // namespace

double t_cdf(double x, double nu) {
  check_nu(nu);
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  if (is_gaussian(nu)) return boost::math::cdf(boost::math::normal_distribution<double>{}, x);
  return boost::math::cdf(boost::math::students_t_distribution<double>{nu}, x);
}

double t_quantile(double p, double nu) {
  check_nu(nu);
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("quantile level must lie in (0,1), got " + std::to_string(p));
  }
  if (is_gaussian(nu)) return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
  return boost::math::quantile(boost::math::students_t_distribution<double>{nu}, p);
}

double t_upper_quantile(double q, double nu) {
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  if (q == 1.0) return -std::numeric_limits<double>::infinity();
  // symmetric law: t^{-1}(1 - q) = -t^{-1}(q)
  return -t_quantile(q, nu);
}

}  // namespace covloss::dist
