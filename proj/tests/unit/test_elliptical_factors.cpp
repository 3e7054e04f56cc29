#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "covloss/elliptical_factors.hpp"
#include "covloss/student_t.hpp"
#include "oracles.hpp"

using namespace covloss;

namespace {

std::vector<MemberSpec> three_members() {
  return {MemberSpec::from_table(0, 50, -242, 20), MemberSpec::from_table(1, 60, 184, 21),
          MemberSpec::from_table(2, 70, 58, 22)};
}

}  // namespace

TEST_CASE("validity region") {
  FactorModel m;
  CHECK(validate_model(m).valid);
  m.rho_cr = 0.95;
  m.rho_wwr = 0.95;
  const auto v = validate_model(m);
  CHECK_FALSE(v.valid);
  CHECK(v.reason.find("rho_cr + rho_wwr") != std::string::npos);

  m = FactorModel{};
  m.rho_wwr = 0.0;
  CHECK_FALSE(validate_model(m).valid);
  m.rho_wwr = 0.5;
  m.rho_cr = 0.5;
  CHECK_FALSE(validate_model(m).valid);
  m.rho_cr = 0.45;
  CHECK(validate_model(m).valid);
  m.rho_mkt = 0.5;
  CHECK_FALSE(validate_model(m).valid);
  m = FactorModel{};
  m.nu = 2.0;
  CHECK_FALSE(validate_model(m).valid);
  m.nu = dist::kGaussianNu;
  CHECK(validate_model(m).valid);
}

TEST_CASE("sampling rejects invalid models and empty batches") {
  const auto members = three_members();
  FactorModel m;
  m.rho_cr = 0.6;
  m.rho_wwr = 0.5;
  CHECK_THROWS_AS(sample_batch(m, members, 10, {1, 0}), InvalidModel);
  CHECK_THROWS_AS(sample_batch(FactorModel{}, members, 0, {1, 0}), std::invalid_argument);
  const auto raw = draw_factors(2, 10, {1, 0}, 5.0);
  CHECK_THROWS_AS(assemble_batch(FactorModel{}, members, raw), InvalidModel);
}

TEST_CASE("batches are deterministic and keyed by seed and batch") {
  const auto members = three_members();
  const FactorModel m;
  const auto a = sample_batch(m, members, 500, {7, 3});
  const auto b = sample_batch(m, members, 500, {7, 3});
  CHECK(a == b);
  CHECK_FALSE(a == sample_batch(m, members, 500, {7, 4}));
  CHECK_FALSE(a == sample_batch(m, members, 500, {8, 3}));
  // a shorter batch is a prefix of a longer one
  const auto c = sample_batch(m, members, 200, {7, 3});
  for (std::size_t p = 0; p < 200; ++p) {
    for (std::size_t i = 0; i < 3; ++i) CHECK(c.x(p, i) == a.x(p, i));
  }
}

TEST_CASE("loadings follow the factor model on known raw draws") {
  const auto members = three_members();
  FactorModel m;
  m.rho_cr = 0.3;
  m.rho_wwr = 0.2;
  RawDraws raw;
  raw.n_paths = 1;
  raw.n_members = 3;
  raw.sqrt_k = {1.5};
  raw.t_common = {0.4};
  raw.e_common = {-1.1};
  raw.t_idio = {0.1, -0.2, 0.3};
  raw.e_idio = {1.0, 0.5, -0.5};
  raw.w_idio = {2.0, -1.0, 0.25};
  const auto b = assemble_batch(m, members, raw);
  for (std::size_t i = 0; i < 3; ++i) {
    const double s = members[i].nom > 0 ? 1.0 : -1.0;
    const double x = 1.5 * (std::sqrt(0.3) * 0.4 + s * std::sqrt(0.2) * raw.w_idio[i] +
                            std::sqrt(0.5) * raw.t_idio[i]);
    const double y = members[i].nom * members[i].sigma * std::sqrt(5.0 / 252.0) * 1.5 *
                     (std::sqrt(0.04) * -1.1 + std::sqrt(0.2) * raw.w_idio[i] + std::sqrt(0.76) * raw.e_idio[i]);
    CHECK(b.x(0, i) == doctest::Approx(x).epsilon(1e-15));
    CHECK(b.y(0, i) == doctest::Approx(y).epsilon(1e-15));
  }
  CHECK(b.mixing_k(0) == doctest::Approx(2.25));
}

TEST_CASE("zero nominal gives zero exposure and no wrong-way loading") {
  std::vector<MemberSpec> members = {MemberSpec::from_table(0, 50, 0.0, 20), MemberSpec::from_table(1, 50, 3, 20)};
  const auto b = sample_batch(FactorModel{}, members, 100, {1, 0});
  for (std::size_t p = 0; p < 100; ++p) CHECK(b.y(p, 0) == 0.0);
}

TEST_CASE("common random numbers: only loadings differ between cells") {
  const auto members = three_members();
  const auto raw = draw_factors(3, 1000, {3, 0}, 5.0);
  FactorModel lo, hi;
  lo.rho_cr = 0.2;
  hi.rho_cr = 0.6;
  const auto a = assemble_batch(lo, members, raw);
  const auto b = assemble_batch(hi, members, raw);
  for (std::size_t p = 0; p < 1000; ++p) {
    CHECK(a.mixing_k(p) == b.mixing_k(p));
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.y(p, i) == b.y(p, i));
  }
  CHECK(assemble_batch(lo, members, raw) == a);
}

TEST_CASE("sample covariance matches the dispersion matrix") {
  const auto members = three_members();
  FactorModel m;
  m.rho_cr = 0.3;
  m.rho_wwr = 0.2;
  m.nu = dist::kGaussianNu;
  const std::size_t n = 200000;
  const auto b = sample_batch(m, members, n, {17, 0});
  const auto disp = factor_dispersion(m, members);
  REQUIRE(disp.gamma.rows() == 6);
  auto value = [&](std::size_t p, std::size_t k) { return k < 3 ? b.x(p, k) : b.y(p, k - 3); };
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = r; c < 6; ++c) {
      std::vector<double> prod(n);
      for (std::size_t p = 0; p < n; ++p) prod[p] = value(p, r) * value(p, c);
      const auto ms = oracle::mean_se(prod);
      CAPTURE(r);
      CAPTURE(c);
      CHECK(std::abs(ms.mean - disp.gamma(r, c)) < 4.5 * ms.se + 1e-15);
    }
  }
  CHECK(is_symmetric_psd(disp.gamma));
}

TEST_CASE("two-dimensional conditional parameters in closed form") {
  EllipticalParams p;
  p.mu = Eigen::Vector2d(0.3, -1.2);
  p.gamma.resize(2, 2);
  p.gamma << 2.0, 0.7, 0.7, 1.5;
  const auto c = conditional_params(p, 0, 1.1);
  REQUIRE(c.mu.size() == 1);
  CHECK(std::abs(c.mu(0) - (-1.2 + 0.7 / 2.0 * (1.1 - 0.3))) <= 1e-12);
  CHECK(std::abs(c.gamma(0, 0) - (1.5 - 0.49 / 2.0)) <= 1e-12);

  const auto d = conditional_params(p, 1, -0.2);
  CHECK(std::abs(d.mu(0) - (0.3 + 0.7 / 1.5 * (-0.2 + 1.2))) <= 1e-12);
  CHECK(std::abs(d.gamma(0, 0) - (2.0 - 0.49 / 1.5)) <= 1e-12);
}

TEST_CASE("three-dimensional Gaussian conditioning agrees with slab Monte Carlo") {
  EllipticalParams p;
  p.mu = Eigen::Vector3d(0.5, -0.3, 1.0);
  p.gamma.resize(3, 3);
  p.gamma << 1.0, 0.6, -0.3, 0.6, 2.0, 0.4, -0.3, 0.4, 1.5;
  const double x0 = 0.9, h = 0.01;
  const auto c = conditional_params(p, 0, x0);

  const Eigen::LLT<Eigen::MatrixXd> llt(p.gamma);
  const Eigen::MatrixXd L = llt.matrixL();
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> nd;
  std::vector<double> a, b, aa, bb, ab;
  while (a.size() < 40000) {
    const Eigen::Vector3d z(nd(gen), nd(gen), nd(gen));
    const Eigen::Vector3d x = p.mu + L * z;
    if (std::abs(x(0) - x0) > h) continue;
    a.push_back(x(1));
    b.push_back(x(2));
  }
  const auto ma = oracle::mean_se(a);
  const auto mb = oracle::mean_se(b);
  CHECK(std::abs(ma.mean - c.mu(0)) < 3.0 * ma.se);
  CHECK(std::abs(mb.mean - c.mu(1)) < 3.0 * mb.se);
  for (std::size_t k = 0; k < a.size(); ++k) {
    aa.push_back((a[k] - ma.mean) * (a[k] - ma.mean));
    bb.push_back((b[k] - mb.mean) * (b[k] - mb.mean));
    ab.push_back((a[k] - ma.mean) * (b[k] - mb.mean));
  }
  const auto vaa = oracle::mean_se(aa), vbb = oracle::mean_se(bb), vab = oracle::mean_se(ab);
  CHECK(std::abs(vaa.mean - c.gamma(0, 0)) < 3.0 * vaa.se);
  CHECK(std::abs(vbb.mean - c.gamma(1, 1)) < 3.0 * vbb.se);
  CHECK(std::abs(vab.mean - c.gamma(0, 1)) < 3.0 * vab.se);
  CHECK(c.gamma(0, 1) == c.gamma(1, 0));
}

TEST_CASE("conditioning errors and PSD handling") {
  EllipticalParams p;
  p.mu = Eigen::Vector2d(0, 0);
  p.gamma = Eigen::Matrix2d::Zero();
  p.gamma(1, 1) = 1.0;
  CHECK_THROWS_AS(conditional_params(p, 0, 0.0), std::domain_error);
  CHECK_THROWS(conditional_params(p, 5, 0.0));

  Eigen::MatrixXd g(2, 2);
  g << 1.0, 1.0, 1.0, 1.0 - 1e-13;
  CHECK(is_symmetric_psd(g));
  const auto clamped = clamp_psd(g);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(clamped).eigenvalues().minCoeff() >= -1e-15);
  g << 1.0, 2.0, 2.0, 1.0;
  CHECK_FALSE(is_symmetric_psd(g));
  CHECK_THROWS(clamp_psd(g));
  g << 1.0, 0.5, 0.4, 1.0;
  CHECK_FALSE(is_symmetric_psd(g));
}
