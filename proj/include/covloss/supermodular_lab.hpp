#pragma once

// Grid certificates for supermodularity (increasing differences) and
// componentwise monotonicity. A pass is a statement about the grid only,
// not a proof on R^n: the checks evaluate the discrete definitions on every
// grid point, every coordinate pair and every ordered pair of grid steps.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace covloss::sm {

using RealFunction = std::function<double(std::span<const double>)>;

/// Sorted sample points per coordinate.
struct GridSpec {
  std::vector<std::vector<double>> axes;

  std::size_t dimension() const { return axes.size(); }
  /// Number of grid points (saturates at SIZE_MAX).
  std::size_t point_count() const;
  /// Each axis has >= 2 strictly increasing finite points.
  void validate() const;

  static GridSpec uniform(std::size_t dimension, std::vector<double> points) {
    return GridSpec{std::vector<std::vector<double>>(dimension, std::move(points))};
  }
};

inline constexpr std::size_t kDefaultEvaluationGuard = 10'000'000;

class GridTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

class VacuousGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// f threw; the message carries the coordinates.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckOptions {
  std::size_t max_evaluations = kDefaultEvaluationGuard;
  /// When set and the grid exceeds max_evaluations, sample this many random
  /// (step pair, remaining setting) combinations per coordinate pair
  /// instead of throwing.
  std::optional<std::uint64_t> subsample_seed;
  std::size_t subsample_per_pair = 100'000;
};

struct PairResult {
  std::size_t i = 0;
  std::size_t j = 0;
  /// min over grid of f(x_i',x_j') - f(x_i',x_j) - f(x_i,x_j') + f(x_i,x_j)
  double min_difference = 0.0;
  /// Grid point with (x_i, x_j) at the lower step, plus the upper steps.
  std::vector<double> witness;
  double xi_upper = 0.0;
  double xj_upper = 0.0;
};

struct IncDiffReport {
  std::vector<PairResult> pairs;
  double min_difference = 0.0;
  double tol = 0.0;
  bool pass = true;
  bool subsampled = false;
  std::size_t evaluations = 0;
};

IncDiffReport check_increasing_differences(const RealFunction& f, const GridSpec& grid, double tol,
                                           const CheckOptions& options = {});

struct MonotoneReport {
  double min_increment = 0.0;  // min over axes of f(.., x_k', ..) - f(.., x_k, ..), x_k < x_k'
  std::size_t axis = 0;
  std::vector<double> witness;  // lower point of the worst step
  double tol = 0.0;
  bool pass = true;
  std::size_t evaluations = 0;
};

/// Scans every adjacent step on every axis from every grid point.
MonotoneReport check_nondecreasing(const RealFunction& f, const GridSpec& grid, double tol,
                                   const CheckOptions& options = {});

/// Increasing-differences check of the CCP allocation f_i on a grid that
/// straddles every threshold. Throws std::invalid_argument for a negative
/// beta and VacuousGrid when an axis lies entirely on one side of B_j.
IncDiffReport check_ccp_allocation_supermodular(std::span<const double> betas,
                                                std::span<const double> thresholds, std::size_t i,
                                                const GridSpec& grid, double tol);

/// Grid with axis j = {B_j - below, B_j} for each threshold, i.e. one point
/// on each side of the default boundary.
GridSpec threshold_vertex_grid(std::span<const double> thresholds, double below = 1.0);

}  // namespace covloss::sm
