#include "covloss/risk_measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace covloss {

namespace {

constexpr double kProbTol = 1e-12;

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_alpha(double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw std::domain_error("confidence level must lie in (1/2, 1), got " + std::to_string(alpha));
  }
}

TailStats tail_stats_raw(std::span<const double> values, std::span<const double> weights, double alpha) {
  check_alpha(alpha);
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (weights[k] > 0.0) atoms.emplace_back(values[k], weights[k]);
  }
  if (atoms.empty()) throw EmptySample("risk measure of an empty sample");
  std::sort(atoms.begin(), atoms.end());

  // merge ties so each distinct value is one atom
  std::size_t out = 0;
  for (std::size_t k = 1; k < atoms.size(); ++k) {
    if (atoms[k].first == atoms[out].first) {
      atoms[out].second += atoms[k].second;
    } else {
      atoms[++out] = atoms[k];
    }
  }
  atoms.resize(out + 1);

  CompensatedSum cum;
  std::size_t var_index = atoms.size();
  double below = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    below = cum.value();
    cum.add(atoms[k].second);
    if (cum.value() > alpha + kProbTol) {
      var_index = k;
      break;
    }
  }
  if (var_index == atoms.size()) {
    // rounding kept the total mass at alpha + tol; the largest atom is VaR
    var_index = atoms.size() - 1;
  }
  const double var = atoms[var_index].first;
  CompensatedSum tail;
  for (std::size_t k = var_index; k < atoms.size(); ++k) tail.add(atoms[k].first * atoms[k].second);
  const double es = (tail.value() + var * (below - alpha)) / (1.0 - alpha);
  return {var, es};
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("losses and weights differ in size");
  CompensatedSum s;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (weights[k] != 0.0) s.add(values[k] * weights[k]);
  }
  return s.value();
}

}  // namespace

WeightedSample WeightedSample::uniform(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("sample values must be finite");
  }
  const double w = values.empty() ? 0.0 : 1.0 / static_cast<double>(values.size());
  std::vector<double> weights(values.size(), w);
  return WeightedSample(std::move(values), std::move(weights));
}

WeightedSample WeightedSample::weighted(std::vector<double> values, std::vector<double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("values and weights differ in size");
  CompensatedSum total;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) throw std::invalid_argument("sample values must be finite");
    if (!(weights[k] >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    total.add(weights[k]);
  }
  if (!values.empty() && std::abs(total.value() - 1.0) >= 1e-12) {
    throw std::invalid_argument("weights sum to " + std::to_string(total.value()) + ", not 1");
  }
  return WeightedSample(std::move(values), std::move(weights));
}

double empirical_var(const WeightedSample& sample, double alpha) { return tail_stats(sample, alpha).var; }

double expected_shortfall(const WeightedSample& sample, double alpha) { return tail_stats(sample, alpha).es; }

TailStats tail_stats(const WeightedSample& sample, double alpha) {
  if (sample.empty()) throw EmptySample("risk measure of an empty sample");
  return tail_stats_raw(sample.values(), sample.weights(), alpha);
}

std::vector<double> survival_weights(std::span<const double> x0, double b0, double gamma,
                                     WeightNormalization mode) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::domain_error("gamma must lie in [0,1)");
  std::size_t survivors = 0;
  for (double x : x0) survivors += x < b0 ? 1 : 0;
  if (survivors == 0) throw NoSurvivors("the reference member defaults on every path");
  const double w = mode == WeightNormalization::self_normalized
                       ? 1.0 / static_cast<double>(survivors)
                       : 1.0 / ((1.0 - gamma) * static_cast<double>(x0.size()));
  std::vector<double> weights(x0.size());
  for (std::size_t p = 0; p < x0.size(); ++p) weights[p] = x0[p] < b0 ? w : 0.0;
  return weights;
}

double cecl(std::span<const double> loss, std::span<const double> weights) { return weighted_mean(loss, weights); }

double economic_capital(std::span<const double> loss, std::span<const double> weights, double alpha) {
  if (loss.size() != weights.size()) throw std::invalid_argument("losses and weights differ in size");
  return tail_stats(WeightedSample::weighted({loss.begin(), loss.end()}, {weights.begin(), weights.end()}), alpha)
      .es;
}

BatchStats batch_statistics(std::span<const double> per_batch) {
  const std::size_t k = per_batch.size();
  if (k < 2) throw std::invalid_argument("batch statistics need at least 2 batches");
  CompensatedSum s;
  for (double v : per_batch) s.add(v);
  const double mean = s.value() / static_cast<double>(k);
  CompensatedSum ss;
  for (double v : per_batch) ss.add((v - mean) * (v - mean));
  const double var = ss.value() / static_cast<double>(k - 1);
  return {mean, std::sqrt(var / static_cast<double>(k))};
}

std::pair<std::size_t, std::size_t> batch_bounds(std::size_t n, std::size_t k, std::size_t b) {
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  const std::size_t begin = b * base + std::min(b, extra);
  return {begin, begin + base + (b < extra ? 1 : 0)};
}

RiskReport risk_report(std::span<const double> loss, std::span<const double> x_reference, double b_reference,
                       double gamma, const RiskOptions& options) {
  if (loss.size() != x_reference.size()) throw std::invalid_argument("losses and latents differ in size");
  const std::size_t n = loss.size();
  const std::size_t k = options.n_batches;
  if (k < 2 || k > n) throw std::invalid_argument("need 2 <= n_batches <= n_paths");

  RiskReport r;
  r.n_paths = n;
  r.n_batches = k;
  r.alpha = options.alpha;

  auto estimate = [&](std::span<const double> l, std::span<const double> x, double& c, TailStats& t,
                      std::size_t* survivors) {
    const auto w = survival_weights(x, b_reference, gamma, WeightNormalization::self_normalized);
    t = tail_stats_raw(l, w, options.alpha);
    if (options.normalization == WeightNormalization::theoretical) {
      c = cecl(l, survival_weights(x, b_reference, gamma, WeightNormalization::theoretical));
    } else {
      c = cecl(l, w);
    }
    if (survivors) *survivors = static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](double v) { return v > 0; }));
  };

  std::vector<double> b_cecl(k), b_ec(k), b_var(k), b_diff(k);
  for (std::size_t b = 0; b < k; ++b) {
    const auto [lo, hi] = batch_bounds(n, k, b);
    TailStats t;
    estimate(loss.subspan(lo, hi - lo), x_reference.subspan(lo, hi - lo), b_cecl[b], t, nullptr);
    b_ec[b] = t.es;
    b_var[b] = t.var;
    b_diff[b] = t.es - b_cecl[b];
  }
  const auto s_cecl = batch_statistics(b_cecl);
  const auto s_ec = batch_statistics(b_ec);
  const auto s_var = batch_statistics(b_var);
  const auto s_diff = batch_statistics(b_diff);

  if (options.batch_mode == BatchMode::pooled) {
    double c = 0.0;
    TailStats t;
    estimate(loss, x_reference, c, t, &r.n_survivors);
    r.cecl = {c, s_cecl.std_error};
    r.ec = {t.es, s_ec.std_error};
    r.var = {t.var, s_var.std_error};
    r.ec_minus_cecl = {t.es - c, s_diff.std_error};
  } else {
    r.n_survivors = static_cast<std::size_t>(
        std::count_if(x_reference.begin(), x_reference.end(), [&](double x) { return x < b_reference; }));
    r.cecl = {s_cecl.mean, s_cecl.std_error};
    r.ec = {s_ec.mean, s_ec.std_error};
    r.var = {s_var.mean, s_var.std_error};
    r.ec_minus_cecl = {s_diff.mean, s_diff.std_error};
  }
  r.batch_cecl = std::move(b_cecl);
  r.batch_ec = std::move(b_ec);
  return r;
}

}  // namespace covloss
