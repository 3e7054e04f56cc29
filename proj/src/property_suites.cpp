#include "covloss/property_suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "covloss/loss_engine.hpp"
#include "covloss/rng.hpp"
#include "covloss/supermodular_lab.hpp"

namespace covloss::sm {

namespace {

struct RandomMarket {
  std::vector<double> betas;
  std::vector<double> thresholds;
  std::vector<double> collateral;
};

RandomMarket random_market(std::size_t n, std::uint64_t seed, std::uint32_t stream) {
  PathRng rng(SubstreamId{seed, StreamDomain::test, stream, static_cast<std::uint32_t>(n)});
  RandomMarket m;
  for (std::size_t j = 0; j < n; ++j) {
    m.betas.push_back(0.1 + 2.0 * rng.uniform());
    m.thresholds.push_back(1.0 + 2.0 * rng.uniform());
    m.collateral.push_back(5.0 + 10.0 * rng.uniform());
  }
  return m;
}

std::vector<double> straddle(double pivot, double scale) {
  return {pivot - 2.0 * scale, pivot - 0.5 * scale, pivot, pivot + scale};
}

}  // namespace

std::vector<SuiteOutcome> run_property_suites(const SuiteOptions& options) {
  std::vector<SuiteOutcome> out;

  for (std::size_t n = 2; n <= options.max_allocation_members; ++n) {
    const RandomMarket m = random_market(n, options.seed, 0);
    const GridSpec grid = threshold_vertex_grid(m.thresholds);
    SuiteOutcome inc{"allocation_increasing_differences_n" + std::to_string(n)};
    SuiteOutcome mono{"allocation_nondecreasing_n" + std::to_string(n)};
    inc.min_difference = mono.min_difference = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const IncDiffReport r = check_ccp_allocation_supermodular(m.betas, m.thresholds, i, grid, 0.0);
      inc.observed_pass = inc.observed_pass && r.pass;
      inc.min_difference = std::min(inc.min_difference, r.min_difference);
      inc.evaluations += r.evaluations;
      const RealFunction f = [&, i](std::span<const double> x) {
        return allocation_coefficient(i, x, m.betas, m.thresholds);
      };
      const MonotoneReport mr = check_nondecreasing(f, grid, 0.0);
      mono.observed_pass = mono.observed_pass && mr.pass;
      mono.min_difference = std::min(mono.min_difference, mr.min_increment);
      mono.evaluations += mr.evaluations;
    }
    out.push_back(inc);
    out.push_back(mono);
  }

  for (std::size_t n = 1; n <= options.max_loss_members; ++n) {
    const RandomMarket m = random_market(n, options.seed, 1);
    GridSpec grid;
    for (std::size_t j = 0; j < n; ++j) grid.axes.push_back(straddle(m.thresholds[j], 1.0));
    for (std::size_t j = 0; j < n; ++j) grid.axes.push_back(straddle(m.collateral[j], 2.0));
    const RealFunction loss = [&, n](std::span<const double> z) {
      const auto x = z.first(n);
      const auto y = z.subspan(n, n);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        total += allocation_coefficient(i, x, m.betas, m.thresholds) * std::max(y[i] - m.collateral[i], 0.0);
      }
      return total;
    };
    const double tol = 1e-12 * 2.0 * static_cast<double>(n);  // 1e-12 times the largest loss on the grid
    const IncDiffReport r = check_increasing_differences(loss, grid, tol);
    out.push_back({"member_loss_increasing_differences_n" + std::to_string(n), true, r.pass, r.min_difference,
                   r.evaluations});
  }

  const RealFunction neg = [](std::span<const double> z) { return -z[0] * z[1]; };
  const IncDiffReport r = check_increasing_differences(neg, GridSpec::uniform(2, {0.0, 1.0, 2.0, 3.0}), 0.0);
  out.push_back({"negative_control_minus_xy", false, r.pass, r.min_difference, r.evaluations});
  return out;
}

}  // namespace covloss::sm
