#include "covloss/supermodular_lab.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <string>

#include "covloss/loss_engine.hpp"
#include "covloss/rng.hpp"

namespace covloss::sm {

std::size_t GridSpec::point_count() const {
  std::size_t total = 1;
  for (const auto& axis : axes) {
    if (axis.empty()) return 0;
    if (total > std::numeric_limits<std::size_t>::max() / axis.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= axis.size();
  }
  return total;
}

void GridSpec::validate() const {
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const auto& axis = axes[k];
    if (axis.size() < 2) {
      throw std::invalid_argument("grid axis " + std::to_string(k) + " needs at least 2 points");
    }
    for (std::size_t a = 0; a < axis.size(); ++a) {
      if (!std::isfinite(axis[a])) {
        throw std::invalid_argument("grid axis " + std::to_string(k) + " has a non-finite point");
      }
      if (a > 0 && !(axis[a] > axis[a - 1])) {
        throw std::invalid_argument("grid axis " + std::to_string(k) + " is not strictly increasing");
      }
    }
  }
}

namespace {

std::string describe(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << ')';
  return os.str();
}

double evaluate(const RealFunction& f, std::span<const double> x) {
  try {
    return f(x);
  } catch (const std::exception& e) {
    throw EvaluationError("function evaluation failed at " + describe(x) + ": " + e.what());
  }
}

// Function values on every grid point, mixed-radix indexed with axis 0 fastest.
class Tabulation {
 public:
  Tabulation(const RealFunction& f, const GridSpec& grid) : grid_(grid) {
    const std::size_t d = grid.dimension();
    stride_.resize(d);
    std::size_t s = 1;
    for (std::size_t k = 0; k < d; ++k) {
      stride_[k] = s;
      s *= grid.axes[k].size();
    }
    values_.resize(s);
    std::vector<double> x(d);
    for (std::size_t p = 0; p < s; ++p) {
      point(p, x);
      values_[p] = evaluate(f, x);
    }
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t p) const { return values_[p]; }
  std::size_t stride(std::size_t k) const { return stride_[k]; }
  std::size_t coord(std::size_t p, std::size_t k) const { return (p / stride_[k]) % grid_.axes[k].size(); }

  void point(std::size_t p, std::vector<double>& x) const {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = grid_.axes[k][coord(p, k)];
  }

 private:
  const GridSpec& grid_;
  std::vector<std::size_t> stride_;
  std::vector<double> values_;
};

void finish(IncDiffReport& report) {
  report.min_difference = std::numeric_limits<double>::infinity();
  for (const auto& pr : report.pairs) report.min_difference = std::min(report.min_difference, pr.min_difference);
  if (report.pairs.empty()) report.min_difference = 0.0;
  report.pass = report.min_difference >= -report.tol;
}

IncDiffReport subsampled_increasing_differences(const RealFunction& f, const GridSpec& grid, double tol,
                                                const CheckOptions& options) {
  IncDiffReport report;
  report.tol = tol;
  report.subsampled = true;
  const std::size_t d = grid.dimension();
  PathRng rng({*options.subsample_seed, StreamDomain::subsample, 0, 0});
  auto pick = [&](std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
  };
  auto pick_steps = [&](std::size_t n, std::size_t& lo, std::size_t& hi) {
    lo = pick(n);
    hi = pick(n);
    if (lo > hi) std::swap(lo, hi);
    if (lo == hi) {
      if (hi + 1 < n) ++hi; else --lo;
    }
  };
  std::vector<double> x(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      PairResult pr{i, j, std::numeric_limits<double>::infinity(), {}, 0.0, 0.0};
      for (std::size_t s = 0; s < options.subsample_per_pair; ++s) {
        for (std::size_t k = 0; k < d; ++k) x[k] = grid.axes[k][pick(grid.axes[k].size())];
        std::size_t a, a2, b, b2;
        pick_steps(grid.axes[i].size(), a, a2);
        pick_steps(grid.axes[j].size(), b, b2);
        auto at = [&](std::size_t ai, std::size_t bj) {
          x[i] = grid.axes[i][ai];
          x[j] = grid.axes[j][bj];
          return evaluate(f, x);
        };
        const double diff = at(a2, b2) - at(a2, b) - at(a, b2) + at(a, b);
        report.evaluations += 4;
        if (diff < pr.min_difference) {
          pr.min_difference = diff;
          x[i] = grid.axes[i][a];
          x[j] = grid.axes[j][b];
          pr.witness = x;
          pr.xi_upper = grid.axes[i][a2];
          pr.xj_upper = grid.axes[j][b2];
        }
      }
      report.pairs.push_back(std::move(pr));
    }
  }
  finish(report);
  return report;
}

}  // namespace

IncDiffReport check_increasing_differences(const RealFunction& f, const GridSpec& grid, double tol,
                                           const CheckOptions& options) {
  grid.validate();
  if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
  if (grid.point_count() > options.max_evaluations) {
    if (options.subsample_seed) return subsampled_increasing_differences(f, grid, tol, options);
    throw GridTooLarge("grid has " + std::to_string(grid.point_count()) + " points, guard is " +
                       std::to_string(options.max_evaluations));
  }

  const Tabulation table(f, grid);
  IncDiffReport report;
  report.tol = tol;
  report.evaluations = table.size();
  const std::size_t d = grid.dimension();
  std::vector<double> x(d);

  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t ni = grid.axes[i].size();
    const std::size_t si = table.stride(i);
    for (std::size_t j = i + 1; j < d; ++j) {
      const std::size_t nj = grid.axes[j].size();
      const std::size_t sj = table.stride(j);
      PairResult pr{i, j, std::numeric_limits<double>::infinity(), {}, 0.0, 0.0};
      std::size_t worst_p = 0, worst_a2 = 0, worst_b2 = 0;
      for (std::size_t p = 0; p < table.size(); ++p) {
        const std::size_t a = table.coord(p, i);
        const std::size_t b = table.coord(p, j);
        for (std::size_t a2 = a + 1; a2 < ni; ++a2) {
          for (std::size_t b2 = b + 1; b2 < nj; ++b2) {
            const std::size_t pa = p + (a2 - a) * si;
            const std::size_t pb = p + (b2 - b) * sj;
            const std::size_t pab = pa + (b2 - b) * sj;
            const double diff = table[pab] - table[pa] - table[pb] + table[p];
            if (diff < pr.min_difference) {
              pr.min_difference = diff;
              worst_p = p;
              worst_a2 = a2;
              worst_b2 = b2;
            }
          }
        }
      }
      table.point(worst_p, x);
      pr.witness = x;
      pr.xi_upper = grid.axes[i][worst_a2];
      pr.xj_upper = grid.axes[j][worst_b2];
      report.pairs.push_back(std::move(pr));
    }
  }
  finish(report);
  return report;
}

MonotoneReport check_nondecreasing(const RealFunction& f, const GridSpec& grid, double tol,
                                   const CheckOptions& options) {
  grid.validate();
  if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
  if (grid.point_count() > options.max_evaluations) {
    throw GridTooLarge("grid has " + std::to_string(grid.point_count()) + " points, guard is " +
                       std::to_string(options.max_evaluations));
  }
  const Tabulation table(f, grid);
  MonotoneReport report;
  report.tol = tol;
  report.evaluations = table.size();
  report.min_increment = std::numeric_limits<double>::infinity();
  std::size_t worst_p = 0;
  for (std::size_t p = 0; p < table.size(); ++p) {
    for (std::size_t k = 0; k < grid.dimension(); ++k) {
      if (table.coord(p, k) + 1 >= grid.axes[k].size()) continue;
      const double inc = table[p + table.stride(k)] - table[p];
      if (inc < report.min_increment) {
        report.min_increment = inc;
        report.axis = k;
        worst_p = p;
      }
    }
  }
  if (!std::isfinite(report.min_increment)) report.min_increment = 0.0;
  report.witness.resize(grid.dimension());
  table.point(worst_p, report.witness);
  report.pass = report.min_increment >= -tol;
  return report;
}

IncDiffReport check_ccp_allocation_supermodular(std::span<const double> betas,
                                                std::span<const double> thresholds, std::size_t i,
                                                const GridSpec& grid, double tol) {
  const std::size_t n = betas.size();
  if (thresholds.size() != n || grid.dimension() != n) {
    throw std::invalid_argument("betas, thresholds and grid dimension must agree");
  }
  if (i >= n) throw std::out_of_range("member index out of range");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(betas[j] >= 0.0)) {
      throw std::invalid_argument("beta_" + std::to_string(j) + " must be nonnegative");
    }
  }
  grid.validate();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& axis = grid.axes[j];
    if (!(axis.front() < thresholds[j] && axis.back() >= thresholds[j])) {
      throw VacuousGrid("grid axis " + std::to_string(j) + " does not straddle threshold " +
                        std::to_string(thresholds[j]));
    }
  }
  std::vector<double> b(betas.begin(), betas.end());
  std::vector<double> t(thresholds.begin(), thresholds.end());
  const RealFunction f = [b = std::move(b), t = std::move(t), i](std::span<const double> x) {
    return allocation_coefficient(i, x, b, t);
  };
  return check_increasing_differences(f, grid, tol);
}

GridSpec threshold_vertex_grid(std::span<const double> thresholds, double below) {
  GridSpec g;
  for (double b : thresholds) g.axes.push_back({b - below, b});
  return g;
}

}  // namespace covloss::sm
