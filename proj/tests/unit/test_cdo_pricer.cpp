#include <doctest.h>

#include <cmath>
#include <vector>

#include "covloss/cdo_pricer.hpp"
#include "covloss/run_config.hpp"
#include "covloss/student_t.hpp"
#include "oracles.hpp"

using namespace covloss;

namespace {

const std::string kConfigs = COVLOSS_CONFIG_DIR;

CdoRunConfig portfolio() { return parse_cdo_config(read_json_file(kConfigs + "/cdo_portfolio.json")); }

}  // namespace

TEST_CASE("payment dates and thresholds") {
  CHECK(payment_dates(5.0, 4) == std::vector<double>{1.25, 2.5, 3.75, 5.0});
  CHECK(payment_dates(5.0, 1) == std::vector<double>{5.0});
  const std::vector<ObligorSpec> obl = {{100, 0.4, 0.02}, {50, 0.0, 0.1}, {10, 0.5, 0.0}};
  const auto dates = payment_dates(5.0, 2);
  const auto th = default_thresholds(obl, dates, 5.0);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 2; ++k) {
      const double gamma = 1.0 - std::exp(-obl[i].lambda * dates[k]);
      CHECK(oracle::t5_cdf(th.at(i, k)) == doctest::Approx(1.0 - gamma).epsilon(1e-12));
    }
    CHECK(th.at(i, 0) > th.at(i, 1));
  }
  CHECK(std::isinf(th.at(2, 1)));
  const auto g = default_thresholds(obl, dates, dist::kGaussianNu);
  CHECK(oracle::normal_cdf(g.at(1, 1)) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(max_loss(obl) == doctest::Approx(60.0 + 50.0 + 5.0));
  CHECK(expected_loss_closed_form(obl, 5.0) ==
        doctest::Approx(60.0 * (1.0 - std::exp(-0.1)) + 50.0 * (1.0 - std::exp(-0.5))));
}

TEST_CASE("expected loss does not depend on correlation") {
  const auto c = portfolio();
  const double el = expected_loss_closed_form(c.obligors, c.maturity);
  const std::vector<double> dates = {c.maturity};
  for (double rho : {0.05, 0.35, 0.65, 0.95}) {
    const auto paths = simulate_loss_paths(c.obligors, rho, c.nu, dates, 20000, 31);
    const auto e = expected_terminal_loss(paths);
    CAPTURE(rho);
    CHECK(std::abs(e.value - el) <= 3.0 * e.std_error);
    CHECK(parity_residual(paths, 0.1 * paths.l_max()) <= 1e-12);
    CHECK(parity_residual(paths, 0.6 * paths.l_max()) <= 1e-12);
  }
}

TEST_CASE("tranche identities") {
  const auto c = portfolio();
  const auto dates = payment_dates(c.maturity, 4);
  const auto paths = simulate_loss_paths(c.obligors, 0.4, c.nu, dates, 5000, 9);
  const double lm = paths.l_max();
  const auto el = expected_terminal_loss(paths);
  const auto full = price_legs(paths, TrancheSpec::equity(lm, c.spread, 4, c.maturity));
  const auto all = price_legs(paths, TrancheSpec::senior(0.0, lm, c.spread, 4, c.maturity));
  CHECK(full.default_leg.value == doctest::Approx(el.value).epsilon(1e-12));
  CHECK(all.default_leg.value == doctest::Approx(el.value).epsilon(1e-12));

  for (auto [a, b] : {std::pair{0.05, 0.15}, std::pair{0.2, 0.6}}) {
    const auto lo = price_legs(paths, TrancheSpec::equity(a * lm, c.spread, 4, c.maturity));
    const auto hi = price_legs(paths, TrancheSpec::equity(b * lm, c.spread, 4, c.maturity));
    const auto mz = price_legs(paths, TrancheSpec::mezzanine(a * lm, b * lm, c.spread, 4, c.maturity));
    CHECK(mz.default_leg.value == doctest::Approx(hi.default_leg.value - lo.default_leg.value).epsilon(1e-12));
    CHECK(mz.payment_leg.value == doctest::Approx(hi.payment_leg.value - lo.payment_leg.value).epsilon(1e-12));
    CHECK(lo.default_leg.value >= 0.0);
    CHECK(lo.default_leg.value <= a * lm);
    CHECK(lo.payment_leg.value <= c.spread * c.maturity * a * lm * (1.0 + 1e-12));
    const auto sn = price_legs(paths, TrancheSpec::senior(a * lm, lm, c.spread, 4, c.maturity));
    CHECK(sn.default_leg.value + lo.default_leg.value == doctest::Approx(el.value).epsilon(1e-12));
    CHECK(sn.payment_leg.value >= 0.0);
  }
}

TEST_CASE("tranche validation") {
  const auto c = portfolio();
  const auto paths = simulate_loss_paths(c.obligors, 0.3, c.nu, std::vector<double>{5.0}, 100, 1);
  const double lm = paths.l_max();
  CHECK_THROWS_AS(price_legs(paths, TrancheSpec::equity(1.1 * lm, 0.1, 1, 5.0)), TrancheError);
  CHECK_THROWS_AS(price_legs(paths, TrancheSpec::equity(0.0, 0.1, 1, 5.0)), TrancheError);
  CHECK_THROWS_AS(price_legs(paths, TrancheSpec::mezzanine(0.5 * lm, 0.2 * lm, 0.1, 1, 5.0)), TrancheError);
  CHECK_THROWS_AS(price_legs(paths, TrancheSpec::senior(lm, lm, 0.1, 1, 5.0)), TrancheError);
  CHECK_THROWS_AS(price_legs(paths, TrancheSpec::equity(0.5 * lm, 0.1, 2, 5.0)), TrancheError);
  CHECK_THROWS_AS(price_legs(paths, TrancheSpec::equity(0.5 * lm, 0.1, 1, 4.0)), TrancheError);
}

TEST_CASE("single obligor") {
  const std::vector<ObligorSpec> one = {{100.0, 0.4, 0.05}};
  const double dp = 1.0 - std::exp(-0.25);
  for (double rho : {0.1, 0.9}) {
    const auto paths = simulate_loss_paths(one, rho, 5.0, std::vector<double>{5.0}, 40000, 5);
    const auto eq = price_legs(paths, TrancheSpec::equity(30.0, 0.1, 1, 5.0));
    CHECK(std::abs(eq.default_leg.value - 30.0 * dp) <= 3.0 * eq.default_leg.std_error);
  }
}

TEST_CASE("near-comonotone pair against quadrature") {
  const std::vector<ObligorSpec> two = {{100.0, 0.5, 0.04}, {100.0, 0.5, 0.04}};
  const double rho = 0.999;
  const double dp = 1.0 - std::exp(-0.2);
  const double b = oracle::normal_quantile(1.0 - dp);
  const double both_survive = oracle::integrate(
      [&](double t) {
        const double s = oracle::normal_cdf((b - std::sqrt(rho) * t) / std::sqrt(1.0 - rho));
        return oracle::normal_pdf(t) * s * s;
      },
      -12.0, 12.0, 1e-13);
  const double any_default = 1.0 - both_survive;
  CHECK(any_default == doctest::Approx(dp).epsilon(0.02));

  const auto paths = simulate_loss_paths(two, rho, dist::kGaussianNu, std::vector<double>{5.0}, 40000, 13);
  const auto eq = price_legs(paths, TrancheSpec::equity(50.0, 0.1, 1, 5.0));
  CAPTURE(any_default);
  CHECK(std::abs(eq.default_leg.value - 50.0 * any_default) <= 3.0 * eq.default_leg.std_error);
}

TEST_CASE("correlation sweep sign pattern on a reduced run") {
  const auto c = portfolio();
  std::vector<TrancheSpec> tranches;
  const double lm = max_loss(c.obligors);
  for (double d : {0.05, 0.1, 0.2}) tranches.push_back(TrancheSpec::equity(d * lm, c.spread, 1, c.maturity));
  for (double a : {0.1, 0.3}) tranches.push_back(TrancheSpec::senior(a * lm, lm, c.spread, 1, c.maturity));
  const std::vector<double> rho = {0.1, 0.4, 0.7};
  const auto s = correlation_sweep(c.obligors, tranches, rho, c.nu, 20000, 3, 3.0);
  CHECK(s.cells.size() == 3);
  CHECK(s.l_max == doctest::Approx(lm));
  CHECK_FALSE(s.checks.empty());
  for (const auto& ck : s.checks) {
    CAPTURE(to_string(ck.kind));
    CHECK(ck.pass);
    CHECK(ck.comparisons > 0);
  }
  CHECK(s.pass);
  const auto again = correlation_sweep(c.obligors, tranches, rho, c.nu, 20000, 3, 3.0);
  CHECK(again.cells[1].legs[0].default_leg.value == s.cells[1].legs[0].default_leg.value);
}
