#pragma once

#include <cstddef>
#include <span>

namespace covloss {

/// One clearing member: default intensity, signed CCP portfolio size, vol.
struct MemberSpec {
  std::size_t id = 0;
  double lambda = 0.0;  // per year, decimal
  double nom = 0.0;     // signed portfolio size (currency)
  double sigma = 0.0;   // annual volatility, fraction

  static MemberSpec from_table(std::size_t id, double lambda_bps, double size, double vol_pct) {
    return {id, lambda_bps * 1e-4, size, vol_pct * 1e-2};
  }
};

using MemberUniverse = std::span<const MemberSpec>;

/// sgn(0) = 0.
constexpr double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace covloss
