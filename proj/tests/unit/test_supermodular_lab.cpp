#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "covloss/loss_engine.hpp"
#include "covloss/property_suites.hpp"
#include "covloss/supermodular_lab.hpp"

using namespace covloss::sm;

namespace {

// Direct transcription of the discrete definition, independent of the
// tabulating checker.
double brute_min_difference(const RealFunction& f, const GridSpec& g) {
  const std::size_t d = g.dimension();
  std::vector<std::size_t> idx(d, 0);
  double best = INFINITY;
  auto value = [&](std::vector<std::size_t> at) {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = g.axes[k][at[k]];
    return f(x);
  };
  while (true) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) {
        for (std::size_t ui = idx[i] + 1; ui < g.axes[i].size(); ++ui) {
          for (std::size_t uj = idx[j] + 1; uj < g.axes[j].size(); ++uj) {
            auto hh = idx, hl = idx, lh = idx;
            hh[i] = ui;
            hh[j] = uj;
            hl[i] = ui;
            lh[j] = uj;
            best = std::min(best, value(hh) - value(hl) - value(lh) + value(idx));
          }
        }
      }
    }
    std::size_t k = 0;
    while (k < d && ++idx[k] == g.axes[k].size()) idx[k++] = 0;
    if (k == d) break;
  }
  return best;
}

std::vector<double> sorted_points(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v;
  while (v.size() < n) {
    const double x = std::round(u(gen) * 8.0) / 8.0;
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("product, negative product and separable sums") {
  const auto g = GridSpec::uniform(2, {-1.0, 0.0, 1.0});
  const RealFunction xy = [](std::span<const double> x) { return x[0] * x[1]; };
  const auto pos = check_increasing_differences(xy, g, 0.0);
  CHECK(pos.pass);
  CHECK(pos.min_difference == 1.0);

  const RealFunction neg = [](std::span<const double> x) { return -x[0] * x[1]; };
  const auto r = check_increasing_differences(neg, g, 0.0);
  CHECK_FALSE(r.pass);
  CHECK(r.min_difference < 0.0);
  REQUIRE(r.pairs.size() == 1);
  const auto& w = r.pairs[0];
  const double diff = neg(std::vector<double>{w.xi_upper, w.xj_upper}) -
                      neg(std::vector<double>{w.xi_upper, w.witness[1]}) -
                      neg(std::vector<double>{w.witness[0], w.xj_upper}) + neg(w.witness);
  CHECK(diff == r.min_difference);

  const RealFunction sep = [](std::span<const double> x) {
    return std::sin(3 * x[0]) + std::exp(x[1]) - x[2] * x[2] * x[2];
  };
  const auto s = check_increasing_differences(sep, GridSpec::uniform(3, {-1.0, 0.5, 2.0}), 1e-12 * 8.0);
  CHECK(s.pass);
  CHECK(std::abs(s.min_difference) <= 1e-12 * 8.0);
  CHECK(s.pairs.size() == 3);
}

TEST_CASE("checker verdict equals the brute-force definition") {
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 3);
    GridSpec g;
    for (std::size_t k = 0; k < d; ++k) g.axes.push_back(sorted_points(gen, 2 + (trial + k) % 3));
    std::vector<double> c(d * d);
    for (auto& v : c) v = coef(gen);
    const RealFunction f = [c, d](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) s += c[i * d + j] * std::tanh(x[i] + 0.5 * x[j]);
      }
      return s + c[0] * x[0] * x[d - 1];
    };
    const auto rep = check_increasing_differences(f, g, 0.0);
    const double brute = brute_min_difference(f, g);
    CHECK(rep.min_difference == doctest::Approx(brute).epsilon(1e-12));
    CHECK(rep.pass == (brute >= 0.0));
  }
}

TEST_CASE("composition with a stop-loss payoff preserves the certificates") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = u(gen), b = u(gen), c = u(gen), k = 2.0 * u(gen);
    // nondecreasing separable part plus a nonnegative product of nondecreasing factors
    const RealFunction f = [=](std::span<const double> x) {
      return a * x[0] + b * std::atan(x[1]) + c * std::exp(x[0]) * (x[1] + 3.0) + x[2];
    };
    const auto g = GridSpec::uniform(3, {-1.0, -0.3, 0.4, 1.0});
    REQUIRE(check_increasing_differences(f, g, 1e-12).pass);
    REQUIRE(check_nondecreasing(f, g, 0.0).pass);
    const double strike = k;
    const RealFunction phi = [=](std::span<const double> x) { return std::max(f(x) - strike, 0.0); };
    CHECK(check_increasing_differences(phi, g, 1e-12).pass);
    CHECK(check_nondecreasing(phi, g, 0.0).pass);
  }
}

TEST_CASE("sums of nondecreasing products have increasing differences") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
    std::vector<double> b(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = u(gen);
      m[i] = u(gen);
    }
    // f_i(x) = 1{x_i >= b_i}, g_i(y) = (y - m_i)^+
    const RealFunction l = [=](std::span<const double> z) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (z[i] >= b[i] ? 1.0 : 0.0) * std::max(z[n + i] - m[i], 0.0);
      return s;
    };
    GridSpec g;
    for (std::size_t i = 0; i < n; ++i) g.axes.push_back({b[i] - 1.0, b[i] - 0.1, b[i], b[i] + 0.7, b[i] + 1.2});
    for (std::size_t i = 0; i < n; ++i) g.axes.push_back({m[i] - 1.0, m[i], m[i] + 0.5, m[i] + 2.0});
    CHECK(check_increasing_differences(l, g, 1e-12).pass);
  }
}

TEST_CASE("CCP allocation certificates") {
  const std::vector<double> betas = {1, 1, 1}, thresholds = {0, 0, 0};
  const auto grid = GridSpec::uniform(3, {-1.0, 1.0});
  for (std::size_t i = 0; i < 3; ++i) {
    const auto r = check_ccp_allocation_supermodular(betas, thresholds, i, grid, 0.0);
    CHECK(r.pass);
    CHECK(r.pairs.size() == 3);
  }
  CHECK(check_ccp_allocation_supermodular(std::vector<double>{1, 0}, std::vector<double>{0, 0}, 0,
                                          GridSpec::uniform(2, {-1.0, 1.0}), 0.0)
            .min_difference == 0.0);
  CHECK_THROWS_AS(check_ccp_allocation_supermodular(std::vector<double>{1, -0.5, 1}, thresholds, 0, grid, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_ccp_allocation_supermodular(betas, thresholds, 0, GridSpec::uniform(3, {1.0, 2.0}), 0.0),
                  VacuousGrid);

  const std::vector<double> b6 = {0.3, 1.7, 0.9, 2.2, 0.1, 1.0};
  const std::vector<double> t6 = {0.5, -0.2, 1.1, 0.0, 2.0, -1.5};
  const auto v6 = threshold_vertex_grid(t6);
  CHECK(v6.point_count() == 64);
  for (std::size_t i = 0; i < 6; ++i) CHECK(check_ccp_allocation_supermodular(b6, t6, i, v6, 0.0).pass);
}

TEST_CASE("nondecreasing scan") {
  const auto g = GridSpec::uniform(2, {0.0, 1.0, 2.0});
  const RealFunction down = [](std::span<const double> x) { return -x[0]; };
  const auto r = check_nondecreasing(down, g, 0.0);
  CHECK_FALSE(r.pass);
  CHECK(r.axis == 0);
  const RealFunction flat = [](std::span<const double>) { return 4.0; };
  const auto c = check_nondecreasing(flat, g, 0.0);
  CHECK(c.pass);
  CHECK(c.min_increment == 0.0);
  const std::vector<double> betas = {0.5, 2.0, 1.0}, th = {0.0, 0.3, -0.4};
  const RealFunction fi = [&](std::span<const double> x) { return covloss::allocation_coefficient(1, x, betas, th); };
  CHECK(check_nondecreasing(fi, threshold_vertex_grid(th), 0.0).pass);
}

TEST_CASE("grid validation, guard and evaluation errors") {
  const RealFunction f = [](std::span<const double> x) { return x[0]; };
  CHECK_THROWS_AS(check_increasing_differences(f, GridSpec{{{0.0}}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_increasing_differences(f, GridSpec{{{1.0, 0.0}}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_increasing_differences(f, GridSpec{{{0.0, NAN}}}, 0.0), std::invalid_argument);

  std::vector<double> axis(10);
  for (std::size_t k = 0; k < 10; ++k) axis[k] = static_cast<double>(k);
  const auto big = GridSpec::uniform(8, axis);
  CHECK_THROWS_AS(check_increasing_differences(f, big, 0.0), GridTooLarge);

  CheckOptions opt;
  opt.subsample_seed = 7;
  opt.subsample_per_pair = 200;
  const RealFunction prod = [](std::span<const double> x) { return x[0] * x[3]; };
  const auto sub = check_increasing_differences(prod, big, 0.0, opt);
  CHECK(sub.subsampled);
  CHECK(sub.pass);
  const auto again = check_increasing_differences(prod, big, 0.0, opt);
  CHECK(again.min_difference == sub.min_difference);

  const RealFunction bad = [](std::span<const double> x) -> double {
    if (x[0] > 0.5) throw std::runtime_error("boom");
    return 0.0;
  };
  try {
    check_increasing_differences(bad, GridSpec::uniform(2, {0.0, 1.0}), 0.0);
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("(1, 0)") != std::string::npos);
  }
}

TEST_CASE("bundled property suites") {
  const auto out = run_property_suites();
  REQUIRE_FALSE(out.empty());
  for (const auto& s : out) {
    CAPTURE(s.name);
    CHECK(s.ok());
  }
  CHECK(out.back().name == "negative_control_minus_xy");
  CHECK_FALSE(out.back().observed_pass);
}
