#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace covloss::sm {

/// Outcome of one grid certificate. A suite succeeds when the observed
/// verdict matches the expected one, so negative controls must fail.
struct SuiteOutcome {
  std::string name;
  bool expected_pass = true;
  bool observed_pass = true;
  double min_difference = 0.0;
  std::size_t evaluations = 0;

  bool ok() const { return expected_pass == observed_pass; }
};

struct SuiteOptions {
  std::size_t max_allocation_members = 6;  // vertex grids for n = 2..max
  std::size_t max_loss_members = 3;        // mixed (x, y) grids, 4 points per axis
  std::uint64_t seed = 1;
};

/// Increasing differences and monotonicity of the CCP allocation on
/// threshold vertex grids, of the member loss on mixed grids, and the
/// -x y negative control.
std::vector<SuiteOutcome> run_property_suites(const SuiteOptions& options = {});

}  // namespace covloss::sm
