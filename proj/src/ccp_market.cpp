#include "covloss/ccp_market.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "covloss/student_t.hpp"

namespace covloss {

void MarginSpec::validate() const {
  if (!(alpha_im > 0.5 && alpha_im < 1.0)) {
    throw ClearingError("IM quantile must lie in (1/2, 1), got " + std::to_string(alpha_im));
  }
  if (!(alpha_stress > alpha_im && alpha_stress < 1.0)) {
    throw ClearingError("SLOIM quantile must lie in (alpha_im, 1), got " + std::to_string(alpha_stress));
  }
}

namespace {

double portfolio_scale(const MemberSpec& member, const FactorModel& model) {
  if (!(member.sigma > 0.0)) {
    throw ClearingError("member " + std::to_string(member.id) + ": sigma must be positive");
  }
  return std::abs(member.nom) * member.sigma * std::sqrt(model.delta_s);
}

}  // namespace

double compute_im(const MemberSpec& member, const MarginSpec& margin, const FactorModel& model) {
  if (!(margin.alpha_im > 0.5 && margin.alpha_im < 1.0)) {
    throw ClearingError("IM quantile must lie in (1/2, 1)");
  }
  return portfolio_scale(member, model) * dist::t_quantile(margin.alpha_im, model.nu);
}

double compute_sloim(const MemberSpec& member, const MarginSpec& margin, const FactorModel& model) {
  margin.validate();
  const double spread =
      dist::t_quantile(margin.alpha_stress, model.nu) - dist::t_quantile(margin.alpha_im, model.nu);
  return portfolio_scale(member, model) * spread;
}

double default_probability(double lambda, double horizon) {
  if (!(lambda >= 0.0)) throw ClearingError("default intensity must be nonnegative");
  return -std::expm1(-lambda * horizon);
}

double default_threshold(double lambda, double horizon, double nu) {
  return dist::t_upper_quantile(default_probability(lambda, horizon), nu);
}

std::vector<double> ClearingSetup::betas(std::size_t reference) const {
  const double df_ref = df.at(reference);
  if (!(df_ref > 0.0)) {
    throw ClearingError("default fund contribution of reference member " + std::to_string(reference) +
                        " is zero; allocation weights are undefined");
  }
  std::vector<double> b(df.size());
  for (std::size_t j = 0; j < df.size(); ++j) b[j] = j == reference ? 0.0 : df[j] / df_ref;
  return b;
}

ClearingSetup compute_cover2_and_df(MemberUniverse members, const MarginSpec& margin,
                                    const FactorModel& model, DfAllocation rule) {
  margin.validate();
  if (members.size() < 2) throw ClearingError("Cover-2 needs at least two members");

  ClearingSetup s;
  const std::size_t n = members.size();
  s.im.resize(n);
  s.sloim.resize(n);
  s.df.resize(n);
  s.thresholds.resize(n);
  s.default_prob.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.im[i] = compute_im(members[i], margin, model);
    s.sloim[i] = compute_sloim(members[i], margin, model);
    s.default_prob[i] = default_probability(members[i].lambda, model.horizon);
    s.thresholds[i] = dist::t_upper_quantile(s.default_prob[i], model.nu);
  }

  const auto positive = std::count_if(s.sloim.begin(), s.sloim.end(), [](double v) { return v > 0.0; });
  if (positive < 2) {
    throw ClearingError("Cover-2 needs at least two members with positive SLOIM");
  }

  std::vector<double> sorted = s.sloim;
  std::partial_sort(sorted.begin(), sorted.begin() + 2, sorted.end(), std::greater<>{});
  s.cover2 = sorted[0] + sorted[1];

  const std::vector<double>& basis = rule == DfAllocation::sloim_proportional ? s.sloim : s.im;
  const double total = std::accumulate(basis.begin(), basis.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) s.df[i] = basis[i] / total * s.cover2;
  return s;
}

ValidityVerdict check_clearing_condition(MemberUniverse members) {
  double sum = 0.0;
  double largest = 0.0;
  for (const auto& m : members) {
    sum += m.nom;
    largest = std::max(largest, std::abs(m.nom));
  }
  if (std::abs(sum) <= 1e-9 * largest) return ValidityVerdict::ok();
  return ValidityVerdict::invalid("member sizes sum to " + std::to_string(sum) + ", not 0");
}

}  // namespace covloss
