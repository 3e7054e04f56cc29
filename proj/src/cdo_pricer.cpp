#include "covloss/cdo_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "covloss/parallel.hpp"
#include "covloss/rng.hpp"
#include "covloss/student_t.hpp"

namespace covloss {

void ObligorSpec::validate() const {
  if (!(notional >= 0.0)) throw TrancheError("obligor notional must be nonnegative");
  if (!(recovery >= 0.0 && recovery <= 1.0)) throw TrancheError("recovery must lie in [0,1]");
  if (!(lambda >= 0.0)) throw TrancheError("default intensity must be nonnegative");
}

double max_loss(std::span<const ObligorSpec> obligors) {
  double total = 0.0;
  for (const auto& o : obligors) total += o.lgd();
  return total;
}

const char* to_string(TrancheKind kind) {
  switch (kind) {
    case TrancheKind::equity: return "equity";
    case TrancheKind::senior: return "senior";
    case TrancheKind::mezzanine: return "mezzanine";
  }
  return "unknown";
}

void TrancheSpec::validate(double l_max) const {
  const double a = attachment, b = detachment;
  bool ok = false;
  switch (kind) {
    case TrancheKind::equity: ok = a == 0.0 && b > 0.0 && b <= l_max; break;
    case TrancheKind::senior: ok = a >= 0.0 && a < l_max && b == l_max; break;
    case TrancheKind::mezzanine: ok = a > 0.0 && a < b && b < l_max; break;
  }
  if (!ok) {
    std::ostringstream os;
    os << to_string(kind) << " tranche bounds [" << a << ", " << b << "] invalid for L_max " << l_max;
    throw TrancheError(os.str());
  }
  if (!(spread >= 0.0)) throw TrancheError("spread must be nonnegative");
  if (n_coupons == 0) throw TrancheError("tranche needs at least one coupon");
  if (!(maturity > 0.0)) throw TrancheError("maturity must be positive");
}

TrancheSpec TrancheSpec::equity(double detachment, double spread, std::size_t n_coupons, double maturity) {
  return {TrancheKind::equity, 0.0, detachment, spread, n_coupons, maturity};
}

TrancheSpec TrancheSpec::senior(double attachment, double l_max, double spread, std::size_t n_coupons,
                                double maturity) {
  return {TrancheKind::senior, attachment, l_max, spread, n_coupons, maturity};
}

TrancheSpec TrancheSpec::mezzanine(double attachment, double detachment, double spread, std::size_t n_coupons,
                                   double maturity) {
  return {TrancheKind::mezzanine, attachment, detachment, spread, n_coupons, maturity};
}

std::vector<double> payment_dates(double maturity, std::size_t n_coupons) {
  if (n_coupons == 0) throw TrancheError("need at least one payment date");
  std::vector<double> dates(n_coupons);
  for (std::size_t k = 0; k < n_coupons; ++k) {
    dates[k] = maturity * static_cast<double>(k + 1) / static_cast<double>(n_coupons);
  }
  return dates;
}

ThresholdTable default_thresholds(std::span<const ObligorSpec> obligors, std::span<const double> dates, double nu) {
  ThresholdTable table(obligors.size(), dates.size());
  for (std::size_t i = 0; i < obligors.size(); ++i) {
    obligors[i].validate();
    for (std::size_t k = 0; k < dates.size(); ++k) {
      const double gamma = -std::expm1(-obligors[i].lambda * dates[k]);
      table.at(i, k) = dist::t_upper_quantile(gamma, nu);
    }
  }
  return table;
}

CdoDraws draw_cdo_factors(std::size_t n_obligors, std::size_t n_paths, std::uint64_t seed, double nu) {
  CdoDraws d;
  d.n_paths = n_paths;
  d.n_obligors = n_obligors;
  d.sqrt_k.resize(n_paths);
  d.t_common.resize(n_paths);
  d.t_idio.resize(n_paths * n_obligors);
  const bool gaussian = dist::is_gaussian(nu);
  for (std::size_t p = 0; p < n_paths; ++p) {
    PathRng rng({seed, StreamDomain::cdo_factors, 0, static_cast<std::uint32_t>(p)});
    d.sqrt_k[p] = gaussian ? 1.0 : std::sqrt(nu / rng.chi_squared(nu));
    d.t_common[p] = rng.normal();
    for (std::size_t i = 0; i < n_obligors; ++i) d.t_idio[p * n_obligors + i] = rng.normal();
  }
  return d;
}

LossPaths loss_paths_from_draws(std::span<const ObligorSpec> obligors, const ThresholdTable& thresholds,
                                const CdoDraws& draws, double rho, std::vector<double> dates) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("correlation must lie in [0,1)");
  const std::size_t n = obligors.size();
  if (draws.n_obligors != n || thresholds.n_obligors() != n || thresholds.n_dates() != dates.size()) {
    throw std::invalid_argument("obligors, thresholds and draws disagree in size");
  }
  std::vector<double> lgd(n);
  for (std::size_t i = 0; i < n; ++i) lgd[i] = obligors[i].lgd();
  const double a = std::sqrt(rho);
  const double b = std::sqrt(1.0 - rho);
  const std::size_t n_dates = dates.size();
  LossPaths out(draws.n_paths, std::move(dates), max_loss(obligors));
  for (std::size_t p = 0; p < draws.n_paths; ++p) {
    const double common = a * draws.t_common[p];
    double* row = out.loss_.data() + p * n_dates;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = draws.sqrt_k[p] * (common + b * draws.t_idio[p * n + i]);
      // thresholds decrease in t, so the first crossing date defaults all later ones
      for (std::size_t k = 0; k < n_dates; ++k) {
        if (x >= thresholds.at(i, k)) {
          for (std::size_t m = k; m < n_dates; ++m) row[m] += lgd[i];
          break;
        }
      }
    }
  }
  return out;
}

LossPaths simulate_loss_paths(std::span<const ObligorSpec> obligors, double rho, double nu,
                              std::span<const double> dates, std::size_t n_paths, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("correlation must lie in [0,1)");
  const auto table = default_thresholds(obligors, dates, nu);
  const auto draws = draw_cdo_factors(obligors.size(), n_paths, seed, nu);
  return loss_paths_from_draws(obligors, table, draws, rho, {dates.begin(), dates.end()});
}

namespace {

// Welford accumulator for a mean and its standard error.
class MeanAccumulator {
 public:
  void add(double v) {
    ++n_;
    const double d = v - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (v - mean_);
  }
  Estimate estimate() const {
    const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    return {mean_, n_ > 0 ? std::sqrt(var / static_cast<double>(n_)) : 0.0};
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Neumaier-compensated mean, for identities that must hold to rounding.
double compensated_mean(std::size_t n, const auto& term) {
  double sum = 0.0, comp = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double v = term(p);
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(n);
}

inline double pos(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

LegPrices price_legs(const LossPaths& paths, const TrancheSpec& tranche) {
  tranche.validate(paths.l_max());
  if (paths.n_dates() != tranche.n_coupons) {
    throw TrancheError("loss paths have " + std::to_string(paths.n_dates()) + " dates, tranche pays " +
                       std::to_string(tranche.n_coupons) + " coupons");
  }
  if (std::abs(paths.dates().back() - tranche.maturity) > 1e-12 * tranche.maturity) {
    throw TrancheError("last payment date does not match tranche maturity");
  }
  const double a = tranche.attachment;
  const double b = tranche.detachment;
  const double l_max = paths.l_max();
  const double s = tranche.spread;
  const double t = tranche.maturity;
  const double slice = s * t / static_cast<double>(tranche.n_coupons);

  MeanAccumulator dl, pl;
  for (std::size_t p = 0; p < paths.n_paths(); ++p) {
    const auto row = paths.path(p);
    const double lt = row.back();
    double d = 0.0, pay = 0.0;
    switch (tranche.kind) {
      case TrancheKind::equity: {
        d = std::min(lt, b);
        double outstanding = 0.0;
        for (double lk : row) outstanding += pos(b - lk);
        pay = slice * outstanding;
        break;
      }
      case TrancheKind::senior: {
        d = pos(lt - a);
        double eaten = 0.0;
        for (double lk : row) eaten += pos(lk - a);
        pay = s * t * (l_max - a) - slice * eaten;
        break;
      }
      case TrancheKind::mezzanine: {
        d = pos(lt - a) - pos(lt - b);
        double eaten = 0.0;
        for (double lk : row) eaten += pos(lk - a) - pos(lk - b);
        pay = s * t * (b - a) - slice * eaten;
        break;
      }
    }
    dl.add(d);
    pl.add(pay);
  }
  return {dl.estimate(), pl.estimate()};
}

Estimate expected_terminal_loss(const LossPaths& paths) {
  MeanAccumulator acc;
  for (std::size_t p = 0; p < paths.n_paths(); ++p) acc.add(paths.terminal(p));
  return acc.estimate();
}

double expected_loss_closed_form(std::span<const ObligorSpec> obligors, double horizon) {
  double total = 0.0;
  for (const auto& o : obligors) total += o.lgd() * -std::expm1(-o.lambda * horizon);
  return total;
}

double parity_residual(const LossPaths& paths, double strike) {
  double worst = 0.0;
  const std::size_t n = paths.n_paths();
  for (std::size_t k = 0; k < paths.n_dates(); ++k) {
    const double put = compensated_mean(n, [&](std::size_t p) { return pos(strike - paths.at(p, k)); });
    const double call = compensated_mean(n, [&](std::size_t p) { return pos(paths.at(p, k) - strike); });
    const double mean = compensated_mean(n, [&](std::size_t p) { return paths.at(p, k); });
    const double scale = std::max({std::abs(put), std::abs(strike), std::abs(mean)});
    worst = std::max(worst, std::abs(put - (call + strike - mean)) / scale);
  }
  return worst;
}

namespace {

double leg_value(const LegPrices& lp, LegKind leg) {
  return leg == LegKind::default_leg ? lp.default_leg.value : lp.payment_leg.value;
}

double leg_se(const LegPrices& lp, LegKind leg) {
  return leg == LegKind::default_leg ? lp.default_leg.std_error : lp.payment_leg.std_error;
}

std::string describe_bounds(const TrancheSpec& t, double l_max) {
  std::ostringstream os;
  os << to_string(t.kind) << "[" << t.attachment / l_max << "," << t.detachment / l_max << "]";
  return os.str();
}

// Folds one increment into a SignCheck; slack < 0 means the sign is violated.
void record(SignCheck& check, double increment, double se, double k_sigma, const std::string& where) {
  const double slack = check.direction * increment + k_sigma * se;
  const double current = check.direction * check.worst_increment + k_sigma * check.std_error;
  if (check.comparisons == 0 || slack < current) {
    check.worst_increment = increment;
    check.std_error = se;
    check.worst_pair = where;
  }
  ++check.comparisons;
  check.pass = check.pass && slack >= 0.0;
}

}  // namespace

CdoSweepResult correlation_sweep(std::span<const ObligorSpec> obligors, const std::vector<TrancheSpec>& tranches,
                                 std::span<const double> rho_grid, double nu, std::size_t n_paths,
                                 std::uint64_t seed, double k_sigma) {
  if (tranches.empty()) throw TrancheError("no tranches to price");
  if (rho_grid.empty()) throw std::invalid_argument("empty correlation grid");
  if (n_paths < 2) throw std::invalid_argument("need at least 2 paths");
  for (double rho : rho_grid) {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("correlation must lie in [0,1)");
  }
  CdoSweepResult result;
  result.tranches = tranches;
  result.l_max = max_loss(obligors);
  const double maturity = tranches.front().maturity;
  const std::size_t n_coupons = tranches.front().n_coupons;
  for (const auto& t : tranches) {
    t.validate(result.l_max);
    if (t.maturity != maturity || t.n_coupons != n_coupons) {
      throw TrancheError("all tranches in a sweep must share maturity and coupon count");
    }
  }
  result.expected_loss_closed_form = expected_loss_closed_form(obligors, maturity);

  const auto dates = payment_dates(maturity, n_coupons);
  const auto table = default_thresholds(obligors, dates, nu);
  const auto draws = draw_cdo_factors(obligors.size(), n_paths, seed, nu);

  result.cells.resize(rho_grid.size());
  parallel_for(rho_grid.size(), [&](std::size_t c) {
    const auto paths = loss_paths_from_draws(obligors, table, draws, rho_grid[c], dates);
    CdoCell cell;
    cell.rho = rho_grid[c];
    cell.expected_loss = expected_terminal_loss(paths);
    for (const auto& t : tranches) {
      cell.legs.push_back(price_legs(paths, t));
      if (t.kind == TrancheKind::equity) {
        cell.parity_residual = std::max(cell.parity_residual, parity_residual(paths, t.detachment));
      }
    }
    result.cells[c] = std::move(cell);
  });

  auto combined = [](double a, double b) { return std::sqrt(a * a + b * b); };
  struct Rule {
    TrancheKind kind;
    LegKind leg;
    int rho_direction;
    int bound_direction;
  };
  const Rule rules[] = {
      {TrancheKind::equity, LegKind::default_leg, -1, +1},
      {TrancheKind::equity, LegKind::payment_leg, +1, +1},
      {TrancheKind::senior, LegKind::default_leg, +1, -1},
      {TrancheKind::senior, LegKind::payment_leg, -1, -1},
  };
  for (const auto& rule : rules) {
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < tranches.size(); ++t) {
      if (tranches[t].kind == rule.kind) idx.push_back(t);
    }
    if (idx.empty()) continue;

    SignCheck by_rho;
    by_rho.kind = rule.kind;
    by_rho.leg = rule.leg;
    by_rho.axis = SweepAxis::correlation;
    by_rho.direction = rule.rho_direction;
    for (std::size_t t : idx) {
      for (std::size_t c = 0; c + 1 < result.cells.size(); ++c) {
        const auto& lo = result.cells[c].legs[t];
        const auto& hi = result.cells[c + 1].legs[t];
        std::ostringstream where;
        where << describe_bounds(tranches[t], result.l_max) << " rho " << result.cells[c].rho << "->"
              << result.cells[c + 1].rho;
        record(by_rho, leg_value(hi, rule.leg) - leg_value(lo, rule.leg),
               combined(leg_se(hi, rule.leg), leg_se(lo, rule.leg)), k_sigma, where.str());
      }
    }
    if (by_rho.comparisons > 0) result.checks.push_back(by_rho);

    // order by the moving bound: B for equity, A for senior
    std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
      return rule.kind == TrancheKind::equity ? tranches[l].detachment < tranches[r].detachment
                                              : tranches[l].attachment < tranches[r].attachment;
    });
    SignCheck by_bound;
    by_bound.kind = rule.kind;
    by_bound.leg = rule.leg;
    by_bound.axis = SweepAxis::attachment;
    by_bound.direction = rule.bound_direction;
    for (const auto& cell : result.cells) {
      for (std::size_t q = 0; q + 1 < idx.size(); ++q) {
        const auto& lo = cell.legs[idx[q]];
        const auto& hi = cell.legs[idx[q + 1]];
        std::ostringstream where;
        where << describe_bounds(tranches[idx[q]], result.l_max) << "->"
              << describe_bounds(tranches[idx[q + 1]], result.l_max) << " at rho " << cell.rho;
        record(by_bound, leg_value(hi, rule.leg) - leg_value(lo, rule.leg),
               combined(leg_se(hi, rule.leg), leg_se(lo, rule.leg)), k_sigma, where.str());
      }
    }
    if (by_bound.comparisons > 0) result.checks.push_back(by_bound);
  }
  result.pass = std::all_of(result.checks.begin(), result.checks.end(), [](const SignCheck& c) { return c.pass; });
  return result;
}

}  // namespace covloss
