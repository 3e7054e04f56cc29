#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covloss/member.hpp"
#include "covloss/rng.hpp"

namespace covloss {

/// Parameters of the Student-t normal-mixture factor model for member
/// default latents X_i and exposure drivers Y_i.
struct FactorModel {
  double rho_cr = 0.05;
  double rho_mkt = 0.04;
  double rho_wwr = 0.05;
  double nu = 5.0;                 // +inf selects the Gaussian limit
  double delta_s = 2.0 / 252.0;    // margin period of risk, years
  double delta_l = 5.0 / 252.0;    // liquidation period, years
  double horizon = 5.0;            // years
};

/// Converts business days to a year fraction.
inline double day_fraction(double days, double days_per_year = 252.0) { return days / days_per_year; }

struct ValidityVerdict {
  bool valid = true;
  std::string reason;

  explicit operator bool() const { return valid; }
  static ValidityVerdict ok() { return {}; }
  static ValidityVerdict invalid(std::string why) { return {false, std::move(why)}; }
};

/// Checks 0 < rho_wwr < min(1 - rho_cr, 1 - rho_mkt), nu > 2 and
/// delta_s < delta_l < horizon.
ValidityVerdict validate_model(const FactorModel& m);

class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raw i.i.d. draws for one batch, independent of any correlation setting.
///
/// Re-assembling the same RawDraws under different loadings gives common
/// random numbers across grid cells.
struct RawDraws {
  std::size_t n_paths = 0;
  std::size_t n_members = 0;    // members 0..n, i.e. n + 1 entries
  std::vector<double> sqrt_k;   // sqrt of the mixing scale per path
  std::vector<double> t_common;
  std::vector<double> e_common;
  std::vector<double> t_idio;   // path-major, n_members per path
  std::vector<double> e_idio;
  std::vector<double> w_idio;
};

/// Substream coordinates for a batch of factor draws.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint32_t batch = 0;
};

/// Draws the raw normals and the mixing scale K = nu / chi2_nu for each path.
/// Path p uses substream (seed, batch, p), so results do not depend on how
/// batches are scheduled.
RawDraws draw_factors(std::size_t n_members, std::size_t n_paths, RngStream stream, double nu);

/// Immutable matrix of latent defaults X and exposure drivers Y.
class ScenarioBatch {
 public:
  ScenarioBatch() = default;
  ScenarioBatch(std::size_t n_paths, std::size_t n_members);

  /// Batch from explicit path-major X and Y values, with mixing scale 1.
  static ScenarioBatch from_values(std::size_t n_paths, std::size_t n_members, std::vector<double> x,
                                   std::vector<double> y);

  std::size_t n_paths() const { return n_paths_; }
  std::size_t n_members() const { return n_members_; }

  double x(std::size_t path, std::size_t member) const { return x_[path * n_members_ + member]; }
  double y(std::size_t path, std::size_t member) const { return y_[path * n_members_ + member]; }
  double mixing_k(std::size_t path) const { return k_[path]; }

  std::span<const double> x_row(std::size_t path) const {
    return {x_.data() + path * n_members_, n_members_};
  }
  std::span<const double> y_row(std::size_t path) const {
    return {y_.data() + path * n_members_, n_members_};
  }

  /// Column of X for one member, copied out.
  std::vector<double> x_column(std::size_t member) const;

  bool operator==(const ScenarioBatch&) const = default;

 private:
  friend ScenarioBatch assemble_batch(const FactorModel&, MemberUniverse, const RawDraws&);

  std::size_t n_paths_ = 0;
  std::size_t n_members_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> k_;
};

/// Applies the factor loadings of `m` to raw draws:
///   Y_i = nom_i sigma_i sqrt(delta_l) sqrt(K) (sqrt(rho_mkt) E + sqrt(rho_wwr) W_i
///         + sqrt(1 - rho_mkt - rho_wwr) E_i)
///   X_i = sqrt(K) (sqrt(rho_cr) T + sgn(nom_i) sqrt(rho_wwr) W_i
///         + sqrt(1 - rho_cr - rho_wwr) T_i)
/// Throws InvalidModel for an invalid model or a member-count mismatch.
ScenarioBatch assemble_batch(const FactorModel& m, MemberUniverse members, const RawDraws& raw);

/// draw_factors followed by assemble_batch.
ScenarioBatch sample_batch(const FactorModel& m, MemberUniverse members, std::size_t n_paths,
                           RngStream stream);

/// Location and dispersion (scale) matrix of an elliptical law.
struct EllipticalParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd gamma;
};

inline constexpr double kPsdRelTol = 1e-10;

/// True when gamma is symmetric and its smallest eigenvalue is >= -tol * max|eigenvalue|.
bool is_symmetric_psd(const Eigen::MatrixXd& gamma, double rel_tol = kPsdRelTol);

/// Eigenvalues in (-tol, 0) are clamped to 0; larger negative ones throw.
Eigen::MatrixXd clamp_psd(const Eigen::MatrixXd& gamma, double rel_tol = kPsdRelTol);

/// Parameters of the remaining coordinates conditional on coordinate
/// `index0` taking the value x0:
///   mu_{|0} = mu + Gamma_{.0} (x0 - mu_0) / Gamma_00
///   Gamma_{|0} = Gamma^X - Gamma_{.0} Gamma_{.0}^T / Gamma_00
/// The result has dimension one less than the input.
EllipticalParams conditional_params(const EllipticalParams& joint, std::size_t index0, double x0);

/// Dispersion matrix of (X_0..X_n, Y_0..Y_n) under the factor model; the
/// covariance is nu / (nu - 2) times this matrix.
EllipticalParams factor_dispersion(const FactorModel& m, MemberUniverse members);

}  // namespace covloss
