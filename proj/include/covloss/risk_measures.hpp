#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace covloss {

/// Loss values with probability weights summing to one.
class WeightedSample {
 public:
  /// Equal weights 1/n.
  static WeightedSample uniform(std::vector<double> values);
  /// Validates weights >= 0, |sum - 1| < 1e-12 and finite values.
  static WeightedSample weighted(std::vector<double> values, std::vector<double> weights);

  std::span<const double> values() const { return values_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

 private:
  WeightedSample(std::vector<double> v, std::vector<double> w) : values_(std::move(v)), weights_(std::move(w)) {}
  std::vector<double> values_;
  std::vector<double> weights_;
};

class EmptySample : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// VaR_alpha = inf{x : Q(X <= x) > alpha} on the weighted empirical law.
/// Cumulative probabilities are compared to alpha with a 1e-12 guard so that
/// accumulated rounding does not move the quantile across an exact level.
double empirical_var(const WeightedSample& sample, double alpha);

/// Atom-corrected expected shortfall
///   (1 - alpha)^{-1} (E[X 1{X >= VaR}] + VaR (Q(X < VaR) - alpha)).
double expected_shortfall(const WeightedSample& sample, double alpha);

struct TailStats {
  double var = 0.0;
  double es = 0.0;
};

/// VaR and ES from a single sort.
TailStats tail_stats(const WeightedSample& sample, double alpha);

enum class WeightNormalization {
  self_normalized,  // divide by the realised survivor mass
  theoretical,      // divide by (1 - gamma) * n_paths
};

class NoSurvivors : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Survival-measure weights 1{x0 < b0} / (1 - gamma), normalised per `mode`.
std::vector<double> survival_weights(std::span<const double> x0, double b0, double gamma,
                                     WeightNormalization mode = WeightNormalization::self_normalized);

/// Weighted mean of the losses.
double cecl(std::span<const double> loss, std::span<const double> weights);

/// Expected shortfall of the weighted loss at alpha.
double economic_capital(std::span<const double> loss, std::span<const double> weights, double alpha = 0.9975);

struct BatchStats {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error (sample stdev / sqrt(k)) over k >= 2 batch estimates.
BatchStats batch_statistics(std::span<const double> per_batch);

/// Point estimate with its batch standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

enum class BatchMode {
  pooled,      // statistic on all paths, batch stderr as error bar
  batch_mean,  // mean of per-batch statistics
};

struct RiskReport {
  Estimate cecl;
  Estimate ec;
  Estimate var;
  Estimate ec_minus_cecl;
  std::size_t n_paths = 0;
  std::size_t n_batches = 0;
  std::size_t n_survivors = 0;
  double alpha = 0.9975;
  std::vector<double> batch_cecl;
  std::vector<double> batch_ec;
};

struct RiskOptions {
  double alpha = 0.9975;
  std::size_t n_batches = 100;
  BatchMode batch_mode = BatchMode::pooled;
  WeightNormalization normalization = WeightNormalization::self_normalized;
};

/// [begin, end) of batch b when n items are split into k contiguous batches.
std::pair<std::size_t, std::size_t> batch_bounds(std::size_t n, std::size_t k, std::size_t b);

/// CECL, EC and VaR of the reference member under its survival measure.
/// Batches are contiguous equal slices of the paths.
RiskReport risk_report(std::span<const double> loss, std::span<const double> x_reference, double b_reference,
                       double gamma, const RiskOptions& options);

}  // namespace covloss
