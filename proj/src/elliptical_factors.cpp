#include "covloss/elliptical_factors.hpp"

#include <cmath>
#include <sstream>

#include "covloss/student_t.hpp"

namespace covloss {

namespace {

// Correlation sums closer than this to 1 leave no idiosyncratic variance.
constexpr double kBoundaryEps = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ValidityVerdict validate_model(const FactorModel& m) {
  if (!(m.rho_cr >= 0.0 && m.rho_cr < 1.0)) {
    return ValidityVerdict::invalid("rho_cr must lie in [0,1), got " + fmt(m.rho_cr));
  }
  if (!(m.rho_mkt >= 0.0 && m.rho_mkt < 1.0)) {
    return ValidityVerdict::invalid("rho_mkt must lie in [0,1), got " + fmt(m.rho_mkt));
  }
  if (!(m.rho_wwr > 0.0)) {
    return ValidityVerdict::invalid("rho_wwr must be strictly positive, got " + fmt(m.rho_wwr));
  }
  if (m.rho_cr + m.rho_wwr >= 1.0 - kBoundaryEps) {
    return ValidityVerdict::invalid("rho_cr + rho_wwr >= 1 (" + fmt(m.rho_cr) + " + " +
                                    fmt(m.rho_wwr) + ")");
  }
  if (m.rho_mkt + m.rho_wwr >= 1.0 - kBoundaryEps) {
    return ValidityVerdict::invalid("rho_mkt + rho_wwr >= 1 (" + fmt(m.rho_mkt) + " + " +
                                    fmt(m.rho_wwr) + ")");
  }
  if (!(m.nu > 2.0)) {
    return ValidityVerdict::invalid("nu must exceed 2 for finite variance, got " + fmt(m.nu));
  }
  if (!(m.delta_s > 0.0 && m.delta_s < m.delta_l && m.delta_l < m.horizon)) {
    return ValidityVerdict::invalid("need 0 < delta_s < delta_l < horizon");
  }
  return ValidityVerdict::ok();
}

RawDraws draw_factors(std::size_t n_members, std::size_t n_paths, RngStream stream, double nu) {
  if (n_members == 0) throw InvalidModel("empty member universe");
  RawDraws raw;
  raw.n_paths = n_paths;
  raw.n_members = n_members;
  raw.sqrt_k.resize(n_paths);
  raw.t_common.resize(n_paths);
  raw.e_common.resize(n_paths);
  raw.t_idio.resize(n_paths * n_members);
  raw.e_idio.resize(n_paths * n_members);
  raw.w_idio.resize(n_paths * n_members);

  const bool gaussian = dist::is_gaussian(nu);
  for (std::size_t p = 0; p < n_paths; ++p) {
    PathRng rng({stream.seed, StreamDomain::ccp_factors, stream.batch, static_cast<std::uint32_t>(p)});
    raw.sqrt_k[p] = gaussian ? 1.0 : std::sqrt(nu / rng.chi_squared(nu));
    raw.t_common[p] = rng.normal();
    raw.e_common[p] = rng.normal();
    const std::size_t base = p * n_members;
    for (std::size_t i = 0; i < n_members; ++i) {
      raw.t_idio[base + i] = rng.normal();
      raw.e_idio[base + i] = rng.normal();
      raw.w_idio[base + i] = rng.normal();
    }
  }
  return raw;
}

ScenarioBatch::ScenarioBatch(std::size_t n_paths, std::size_t n_members)
    : n_paths_(n_paths),
      n_members_(n_members),
      x_(n_paths * n_members),
      y_(n_paths * n_members),
      k_(n_paths) {}

ScenarioBatch ScenarioBatch::from_values(std::size_t n_paths, std::size_t n_members, std::vector<double> x,
                                         std::vector<double> y) {
  if (x.size() != n_paths * n_members || y.size() != n_paths * n_members) {
    throw std::invalid_argument("X and Y must hold n_paths * n_members values");
  }
  ScenarioBatch b;
  b.n_paths_ = n_paths;
  b.n_members_ = n_members;
  b.x_ = std::move(x);
  b.y_ = std::move(y);
  b.k_.assign(n_paths, 1.0);
  return b;
}

std::vector<double> ScenarioBatch::x_column(std::size_t member) const {
  std::vector<double> col(n_paths_);
  for (std::size_t p = 0; p < n_paths_; ++p) col[p] = x(p, member);
  return col;
}

ScenarioBatch assemble_batch(const FactorModel& m, MemberUniverse members, const RawDraws& raw) {
  if (auto v = validate_model(m); !v) throw InvalidModel(v.reason);
  if (members.empty()) throw InvalidModel("empty member universe");
  if (members.size() != raw.n_members) {
    throw InvalidModel("raw draws cover " + std::to_string(raw.n_members) + " members, universe has " +
                       std::to_string(members.size()));
  }
  const std::size_t n = members.size();
  const double a_cr = std::sqrt(m.rho_cr);
  const double a_wwr = std::sqrt(m.rho_wwr);
  const double a_x_idio = std::sqrt(1.0 - m.rho_cr - m.rho_wwr);
  const double a_mkt = std::sqrt(m.rho_mkt);
  const double a_y_idio = std::sqrt(1.0 - m.rho_mkt - m.rho_wwr);
  const double sqrt_dl = std::sqrt(m.delta_l);

  std::vector<double> x_wwr(n), y_scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    x_wwr[i] = sgn(members[i].nom) * a_wwr;
    y_scale[i] = members[i].nom * members[i].sigma * sqrt_dl;
  }

  ScenarioBatch out(raw.n_paths, n);
  for (std::size_t p = 0; p < raw.n_paths; ++p) {
    const double sk = raw.sqrt_k[p];
    const double x_common = a_cr * raw.t_common[p];
    const double y_common = a_mkt * raw.e_common[p];
    const std::size_t base = p * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = raw.w_idio[base + i];
      out.x_[base + i] = sk * (x_common + x_wwr[i] * w + a_x_idio * raw.t_idio[base + i]);
      out.y_[base + i] = y_scale[i] * sk * (y_common + a_wwr * w + a_y_idio * raw.e_idio[base + i]);
    }
    out.k_[p] = sk * sk;
  }
  return out;
}

ScenarioBatch sample_batch(const FactorModel& m, MemberUniverse members, std::size_t n_paths,
                           RngStream stream) {
  if (auto v = validate_model(m); !v) throw InvalidModel(v.reason);
  if (n_paths == 0) throw std::invalid_argument("n_paths must be at least 1");
  return assemble_batch(m, members, draw_factors(members.size(), n_paths, stream, m.nu));
}

bool is_symmetric_psd(const Eigen::MatrixXd& gamma, double rel_tol) {
  if (gamma.rows() != gamma.cols()) return false;
  if (gamma.size() == 0) return true;
  const double scale = gamma.cwiseAbs().maxCoeff();
  if (!(gamma - gamma.transpose()).isZero(rel_tol * std::max(scale, 1e-300))) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  return ev.minCoeff() >= -rel_tol * top;
}

Eigen::MatrixXd clamp_psd(const Eigen::MatrixXd& gamma, double rel_tol) {
  const Eigen::MatrixXd sym = 0.5 * (gamma + gamma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() >= 0.0) return sym;
  if (ev.minCoeff() < -rel_tol * top) {
    throw std::invalid_argument("matrix is not positive semi-definite");
  }
  ev = ev.cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

EllipticalParams conditional_params(const EllipticalParams& joint, std::size_t index0, double x0) {
  const auto d = static_cast<Eigen::Index>(joint.mu.size());
  if (joint.gamma.rows() != d || joint.gamma.cols() != d) {
    throw std::invalid_argument("mu and gamma dimensions disagree");
  }
  const auto k = static_cast<Eigen::Index>(index0);
  if (k >= d) throw std::out_of_range("conditioning index out of range");
  const double g00 = joint.gamma(k, k);
  if (!(g00 > 0.0)) throw std::domain_error("degenerate conditioning variance");

  // indices of the remaining coordinates, in order
  std::vector<Eigen::Index> rest;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j != k) rest.push_back(j);
  }
  const auto m = static_cast<Eigen::Index>(rest.size());
  Eigen::VectorXd g0(m), mu_rest(m);
  Eigen::MatrixXd g_rest(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    g0(a) = joint.gamma(k, rest[a]);
    mu_rest(a) = joint.mu(rest[a]);
    for (Eigen::Index b = 0; b < m; ++b) g_rest(a, b) = joint.gamma(rest[a], rest[b]);
  }

  EllipticalParams out;
  out.mu = mu_rest + g0 * ((x0 - joint.mu(k)) / g00);
  out.gamma = g_rest - (g0 * g0.transpose()) / g00;
  out.gamma = 0.5 * (out.gamma + out.gamma.transpose());
  return out;
}

EllipticalParams factor_dispersion(const FactorModel& m, MemberUniverse members) {
  const auto n = static_cast<Eigen::Index>(members.size());
  EllipticalParams p;
  p.mu = Eigen::VectorXd::Zero(2 * n);
  p.gamma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const double sqrt_dl = std::sqrt(m.delta_l);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& mi = members[static_cast<std::size_t>(i)];
    const double si = mi.nom * mi.sigma * sqrt_dl;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& mj = members[static_cast<std::size_t>(j)];
      const double sj = mj.nom * mj.sigma * sqrt_dl;
      // X-X block
      p.gamma(i, j) = i == j ? 1.0 : m.rho_cr;
      // Y-Y block
      p.gamma(n + i, n + j) = i == j ? si * si : si * sj * m.rho_mkt;
    }
    // X_i shares only W_i with Y_i
    const double xy = sgn(mi.nom) * si * m.rho_wwr;
    p.gamma(i, n + i) = xy;
    p.gamma(n + i, i) = xy;
  }
  return p;
}

}  // namespace covloss
