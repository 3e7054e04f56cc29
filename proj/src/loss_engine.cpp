#include "covloss/loss_engine.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>

namespace covloss {

namespace {

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }

// 1 + sum_j beta_j 1{x_j < B_j}, summed in index order.
inline double survivor_denominator(std::span<const double> x, std::span<const double> betas,
                                   std::span<const double> thresholds) {
  double denom = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < thresholds[j]) denom += betas[j];
  }
  return denom;
}

void check_sizes(std::size_t i, std::span<const double> x, std::span<const double> betas,
                 std::span<const double> thresholds) {
  if (betas.size() != x.size() || thresholds.size() != x.size()) {
    throw std::invalid_argument("allocation_coefficient: x, betas and thresholds differ in size");
  }
  if (i >= x.size()) throw std::out_of_range("allocation_coefficient: member index out of range");
}

}  // namespace

double allocation_coefficient(std::size_t i, std::span<const double> x, std::span<const double> betas,
                              std::span<const double> thresholds) {
  check_sizes(i, x, betas, thresholds);
  if (!(x[i] >= thresholds[i])) return 0.0;
  return 1.0 / survivor_denominator(x, betas, thresholds);
}

LossVector member_loss(const ScenarioBatch& batch, const ClearingSetup& setup, std::size_t reference,
                       bool keep_contributions) {
  const std::size_t n = setup.size();
  if (batch.n_members() != n) {
    throw std::invalid_argument("batch has " + std::to_string(batch.n_members()) +
                                " members, clearing setup has " + std::to_string(n));
  }
  if (reference >= n) throw std::out_of_range("reference member out of range");
  const std::vector<double> betas = setup.betas(reference);
  std::vector<double> collateral(n);
  for (std::size_t i = 0; i < n; ++i) collateral[i] = setup.collateral(i);

  LossVector out;
  out.n_members = n;
  out.total.assign(batch.n_paths(), 0.0);
  if (keep_contributions) out.contributions.assign(batch.n_paths() * n, 0.0);

  for (std::size_t p = 0; p < batch.n_paths(); ++p) {
    const auto x = batch.x_row(p);
    const auto y = batch.y_row(p);
    const double share = 1.0 / survivor_denominator(x, betas, setup.thresholds);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == reference) continue;
      const double f = x[i] >= setup.thresholds[i] ? share : 0.0;
      const double term = f * positive_part(y[i] - collateral[i]);
      total += term;
      if (keep_contributions) out.contributions[p * n + i] = term;
    }
    out.total[p] = total;
  }
  return out;
}

LossSpec ccp_loss_spec(const ClearingSetup& setup, std::size_t reference) {
  const std::size_t n = setup.size();
  if (reference >= n) throw std::out_of_range("reference member out of range");
  auto betas = std::make_shared<const std::vector<double>>(setup.betas(reference));
  auto thresholds = std::make_shared<const std::vector<double>>(setup.thresholds);
  auto collateral = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) (*collateral)[i] = setup.collateral(i);

  LossSpec spec;
  spec.allocation = [betas, thresholds](std::size_t i, std::span<const double> x) {
    return allocation_coefficient(i, x, *betas, *thresholds);
  };
  spec.severity = [collateral](std::size_t i, double y) { return positive_part(y - (*collateral)[i]); };
  for (std::size_t i = 0; i < n; ++i) {
    if (i != reference) spec.members.push_back(i);
  }
  return spec;
}

LossSpec bilateral_loss_spec(std::vector<double> thresholds, std::vector<double> collateral) {
  if (thresholds.size() != collateral.size()) {
    throw std::invalid_argument("thresholds and collateral differ in size");
  }
  const std::size_t n = thresholds.size();
  auto b = std::make_shared<const std::vector<double>>(std::move(thresholds));
  auto m = std::make_shared<const std::vector<double>>(std::move(collateral));
  LossSpec spec;
  spec.allocation = [b](std::size_t i, std::span<const double> x) { return x[i] >= (*b)[i] ? 1.0 : 0.0; };
  spec.severity = [m](std::size_t i, double y) { return positive_part(y - (*m)[i]); };
  for (std::size_t i = 0; i < n; ++i) spec.members.push_back(i);
  return spec;
}

LossVector generic_loss(const ScenarioBatch& batch, const LossSpec& spec, bool keep_contributions) {
  if (!spec.allocation || !spec.severity) throw std::invalid_argument("loss spec has empty functions");
  const std::size_t n = batch.n_members();
  for (std::size_t i : spec.members) {
    if (i >= n) {
      throw std::invalid_argument("loss spec refers to member " + std::to_string(i) + " but batch has " +
                                  std::to_string(n));
    }
  }
  LossVector out;
  out.n_members = n;
  out.total.assign(batch.n_paths(), 0.0);
  if (keep_contributions) out.contributions.assign(batch.n_paths() * n, 0.0);
  for (std::size_t p = 0; p < batch.n_paths(); ++p) {
    const auto x = batch.x_row(p);
    const auto y = batch.y_row(p);
    double total = 0.0;
    for (std::size_t i : spec.members) {
      const double term = spec.allocation(i, x) * spec.severity(i, y[i]);
      total += term;
      if (keep_contributions) out.contributions[p * n + i] = term;
    }
    out.total[p] = total;
  }
  return out;
}

}  // namespace covloss
