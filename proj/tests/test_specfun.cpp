#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rmt/errors.hpp"
#include "rmt/log_scaled.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/specfun.hpp"

using namespace rmt;
using namespace rmt::specfun;
using oracle::relative_error;

TEST_SUITE("specfun") {

TEST_CASE("log-scaled arithmetic") {
  const LogScaled z = LogScaled::zero();
  CHECK(z.sign() == 0);
  CHECK(std::isinf(z.log_magnitude()));
  CHECK(z.log_magnitude() < 0);
  CHECK(LogScaled::from_double(0.0) == z);
  CHECK(LogScaled::from_log(0, 3.0) == z);

  const LogScaled a = LogScaled::from_log(-1, 700.0);
  const LogScaled b = LogScaled::from_log(1, 800.0);
  const LogScaled p = a * b;
  CHECK(p.sign() == -1);
  CHECK(p.log_magnitude() == 1500.0);
  const LogScaled q = a / b;
  CHECK(q.sign() == -1);
  CHECK(q.log_magnitude() == -100.0);

  CHECK((LogScaled::from_double(2.5) + LogScaled::from_double(-2.5)).is_zero());
  CHECK((LogScaled::from_double(3.0) - LogScaled::from_double(1.0)).to_double() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(LogScaled::from_double(-2.0).pow(3.0).to_double() == doctest::Approx(-8.0).epsilon(1e-15));
  CHECK_THROWS_AS(LogScaled::from_double(-8.0).pow(1.0 / 3.0), DomainError);
  CHECK(relative_difference(LogScaled::from_double(1.0), LogScaled::from_double(-1.0)) == INFINITY);
}

TEST_CASE("log_gamma") {
  CHECK(log_gamma(1.0) == doctest::Approx(0.0));
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-13));
  CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-13));
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma(-1.5), DomainError);
}

TEST_CASE("multivariate_log_gamma") {
  CHECK(multivariate_log_gamma(1, 3.0) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(multivariate_log_gamma(2, 2.0) == doctest::Approx(std::log(std::numbers::pi)).epsilon(1e-13));
  CHECK(multivariate_log_gamma(3, 4.0) ==
        doctest::Approx(std::log(12.0 * std::pow(std::numbers::pi, 3))).epsilon(1e-13));
  CHECK_THROWS_AS(multivariate_log_gamma(3, 2.0), DomainError);
}

TEST_CASE("laguerre recurrence equals the explicit sum") {
  CHECK(laguerre(0, 2.3, 4.0) == 1.0);
  CHECK(laguerre(1, 2.0, 1.0) == doctest::Approx(2.0));
  const auto ref = oracle::laguerre_sum(5, 3.0, 2.5);
  CHECK(relative_error(laguerre(5, 3.0, 2.5), ref.value) < 1e-12);
  for (double s : {0.0, 0.5, 3.0, 7.0}) {
    for (int mu = 0; mu <= 10; ++mu) {
      for (int i = 0; i < 50; ++i) {
        const double x = 0.4 * i;
        const auto want = oracle::laguerre_sum(mu, s, x);
        // near a root the sum itself carries rounding of order eps * sum|terms|
        CHECK(std::fabs(laguerre(mu, s, x) - want.value) <= 1e-11 * std::max(std::fabs(want.value), want.magnitude));
      }
    }
  }
}

TEST_CASE("hermite recurrence equals the explicit sum") {
  CHECK(hermite(0, 0.7) == 1.0);
  CHECK(hermite(2, 1.0) == doctest::Approx(2.0));
  CHECK(relative_error(hermite(7, 1.3), oracle::hermite_sum(7, 1.3).value) < 1e-12);
  for (int mu = 0; mu <= 10; ++mu) {
    for (int i = 0; i < 50; ++i) {
      const double x = -5.0 + 10.0 * i / 49.0;
      const auto want = oracle::hermite_sum(mu, x);
      CHECK(std::fabs(hermite(mu, x) - want.value) <= 1e-11 * std::max(std::fabs(want.value), want.magnitude));
    }
  }
}

TEST_CASE("kummer_1f1") {
  CHECK(kummer_1f1(1.7, 2.2, 0.0).to_double() == 1.0);
  CHECK(kummer_1f1(1.0, 2.0, 1.0).to_double() == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(kummer_1f1(1.0, -2.0, 1.0), DomainError);
  CHECK_THROWS_AS(kummer_1f1(1.0, 0.0, 1.0), DomainError);

  // Integral representation by independent quadrature.
  const double a = 2.5, b = 4.0, z = 7.0;
  const double integral = oracle::integrate(
      [=](double t) { return std::exp(z * t) * std::pow(t, a - 1.0) * std::pow(1.0 - t, b - a - 1.0); },
      QuadratureSpec::bounded(0.0, 1.0, 1e-13));
  const double beta = std::tgamma(a) * std::tgamma(b - a) / std::tgamma(b);
  CHECK(relative_error(kummer_1f1(a, b, z).to_double(), integral / beta) < 1e-9);

  SUBCASE("large arguments") {
    for (double zz : {60.0, -60.0, 300.0}) {
      CHECK(relative_error(kummer_1f1(1.0, 2.0, zz).to_double(), std::expm1(zz) / zz) < 1e-10);
    }
    // 1F1(2; 11; -200) = e^{-200} 1F1(9; 11; 200), positive-term series in long double
    long double term = 1.0L, sum = 1.0L;
    for (int k = 0; k < 2000; ++k) {
      term *= (9.0L + k) / (11.0L + k) * 200.0L / (k + 1.0L);
      sum += term;
      if (term < 1e-22L * sum) break;
    }
    const double log_want = static_cast<double>(std::log(sum)) - 200.0;
    const LogScaled got = kummer_1f1(2.0, 11.0, -200.0);
    CHECK(got.sign() == 1);
    CHECK(std::fabs(got.log_magnitude() - log_want) < 1e-10);
  }
}

TEST_CASE("tricomi_u") {
  CHECK(tricomi_u(1.0, 2.0, 2.0).to_double() == doctest::Approx(0.5).epsilon(1e-10));
  const double e1 = std::numbers::e * oracle::expint_e1(1.0);
  CHECK(e1 == doctest::Approx(0.5963473624).epsilon(1e-9));
  CHECK(relative_error(tricomi_u(1.0, 1.0, 1.0).to_double(), e1) < 1e-9);

  // Self-oracle at tightened tolerance and doubled subdivision cap.
  {
    const double a = 3.0, b = -2.0, z = 5.0;
    QuadratureSpec spec = QuadratureSpec::half_line_positive(1e-13);
    spec.max_subdivisions = 4000;
    const auto tight = integrate(
        [=](double t) { return LogScaled::from_log(1, (a - 1.0) * std::log(t) - z * t + (b - a - 1.0) * std::log1p(t)); },
        spec);
    const double want = tight.to_double() / std::tgamma(a);
    CHECK(relative_error(tricomi_u(a, b, z).to_double(), want) < 1e-9);
  }

  CHECK_THROWS_AS(tricomi_u(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(tricomi_u(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("tricomi_u agrees with the two-1F1 combination") {
  // U = Gamma(1-b)/Gamma(a-b+1) M(a,b,z) + Gamma(b-1)/Gamma(a) z^{1-b} M(a-b+1, 2-b, z)
  struct P {
    double a, b, z;
  };
  for (const P& p : {P{1.0, 0.5, 2.0}, P{2.0, 1.5, 0.7}, P{1.3, -0.4, 3.0}, P{3.0, 2.5, 4.5}, P{0.8, 0.3, 5.0}}) {
    const double m1 = kummer_1f1(p.a, p.b, p.z).to_double();
    const double m2 = kummer_1f1(p.a - p.b + 1.0, 2.0 - p.b, p.z).to_double();
    const double combo = std::tgamma(1.0 - p.b) / std::tgamma(p.a - p.b + 1.0) * m1 +
                         std::tgamma(p.b - 1.0) / std::tgamma(p.a) * std::pow(p.z, 1.0 - p.b) * m2;
    CHECK(relative_error(tricomi_u(p.a, p.b, p.z).to_double(), combo) < 1e-7);
  }
}

TEST_CASE("gauss_2f1") {
  CHECK(gauss_2f1(1.2, 0.7, 2.5, 0.0).to_double() == 1.0);
  CHECK(gauss_2f1(1.0, 1.0, 2.0, 0.5).to_double() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  // Euler integral, transformed branch
  const double a = 2.0, b = 1.5, c = 3.0, z = -4.0;
  const double integral = oracle::integrate(
      [=](double t) { return std::pow(t, b - 1.0) * std::pow(1.0 - t, c - b - 1.0) * std::pow(1.0 - z * t, -a); },
      QuadratureSpec::bounded(0.0, 1.0, 1e-13));
  const double want = std::tgamma(c) / (std::tgamma(b) * std::tgamma(c - b)) * integral;
  CHECK(relative_error(gauss_2f1(a, b, c, z).to_double(), want) < 1e-8);
  CHECK_THROWS_AS(gauss_2f1(1.0, 1.0, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(gauss_2f1(1.0, 1.0, -1.0, 0.3), DomainError);
}

TEST_CASE("hyp_2f2") {
  CHECK(hyp_2f2(1.0, 2.0, 3.0, 4.0, 0.0).to_double() == 1.0);
  long double sum = 0.0L, fact = 1.0L;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) fact *= k;
    sum += 1.0L / ((k + 1.0L) * (k + 1.0L) * fact);  // k! / ((k+1)!)^2
  }
  CHECK(relative_error(hyp_2f2(1.0, 1.0, 2.0, 2.0, 1.0).to_double(), static_cast<double>(sum)) < 1e-8);
  for (double z : {-3.0, 0.5, 20.0}) CHECK(hyp_2f2(0.0, 0.5, -2.5, 1.5, z).to_double() == 1.0);
}

TEST_CASE("integrate") {
  auto exp_neg = [](double t) { return LogScaled::from_log(1, -t); };
  CHECK(integrate(exp_neg, QuadratureSpec::half_line_positive()).to_double() == doctest::Approx(1.0).epsilon(1e-11));
  auto gauss = [](double t) { return LogScaled::from_log(1, -t * t); };
  CHECK(integrate(gauss, QuadratureSpec::full_line()).to_double() ==
        doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-11));
  auto cubic = [](double t) { return LogScaled::from_log(1, 3.0 * std::log(t) - t); };
  CHECK(integrate(cubic, QuadratureSpec::half_line_positive()).to_double() == doctest::Approx(6.0).epsilon(1e-11));
  auto mirror = [](double t) { return LogScaled::from_log(1, t); };
  CHECK(integrate(mirror, QuadratureSpec::half_line_negative()).to_double() == doctest::Approx(1.0).epsilon(1e-11));

  SUBCASE("max-factoring handles huge and tiny scales") {
    auto far = [](double t) { return LogScaled::from_log(1, -(t - 1000.0) * (t - 1000.0) + 5000.0); };
    const LogScaled v = integrate(far, QuadratureSpec::half_line_positive());
    CHECK(v.log_magnitude() == doctest::Approx(5000.0 + 0.5 * std::log(std::numbers::pi)).epsilon(1e-12));
    auto tiny = [](double t) { return LogScaled::from_log(1, -t - 2000.0); };
    CHECK(integrate(tiny, QuadratureSpec::half_line_positive()).log_magnitude() == doctest::Approx(-2000.0));
  }

  SUBCASE("signed integrand and subdivision cap") {
    auto osc = [](double t) { return LogScaled::from_double(std::sin(50.0 * t) * std::exp(-t)); };
    QuadratureSpec capped = QuadratureSpec::half_line_positive(1e-13);
    capped.max_subdivisions = 1;
    CHECK_THROWS_AS(integrate(osc, capped), ConvergenceError);
    CHECK(integrate(osc, QuadratureSpec::half_line_positive()).to_double() ==
          doctest::Approx(50.0 / 2501.0).epsilon(1e-10));
  }

  SUBCASE("invariant under doubling the subdivision cap") {
    std::vector<std::pair<LogIntegrand, QuadratureSpec>> cases = {
        {exp_neg, QuadratureSpec::half_line_positive()},
        {gauss, QuadratureSpec::full_line()},
        {cubic, QuadratureSpec::half_line_positive()},
        {[](double t) { return LogScaled::from_double(std::sqrt(t) * std::log(t)); }, QuadratureSpec::bounded(0, 1)},
    };
    for (auto& [f, spec] : cases) {
      QuadratureSpec doubled = spec;
      doubled.max_subdivisions *= 2;
      CHECK(relative_difference(integrate(f, doubled), integrate(f, spec)) < 1e-9);
    }
  }

  SUBCASE("quadrature spec validation") {
    QuadratureSpec bad = QuadratureSpec::half_line_positive(0.0);
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = QuadratureSpec::half_line_positive(1.0);
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = QuadratureSpec::half_line_positive();
    bad.max_subdivisions = 0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    CHECK_THROWS_AS(QuadratureSpec::bounded(1.0, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(integrate(exp_neg, QuadratureSpec::bounded(2.0, 1.0)), DomainError);
  }
}

TEST_CASE("tricomi moment identity") {
  CHECK(relative_error(oracle::tricomi_moment_lhs(1, 3, 1, 1), oracle::tricomi_moment_rhs(1, 3, 1, 1)) < 1e-7);
  std::mt19937_64 gen(20);
  std::uniform_real_distribution<double> ua(0.5, 3.0), ub(-2.0, 4.0), uc(-0.5, 3.0), um(0.2, 3.0);
  for (int i = 0; i < 5; ++i) {
    const double a = ua(gen), b = ub(gen), c = uc(gen), m = um(gen);
    CAPTURE(a);
    CAPTURE(b);
    CAPTURE(c);
    CAPTURE(m);
    CHECK(relative_error(oracle::tricomi_moment_lhs(a, b, c, m), oracle::tricomi_moment_rhs(a, b, c, m)) < 1e-7);
  }
}

TEST_CASE("kummer moment identity") {
  std::mt19937_64 gen(39);
  std::uniform_real_distribution<double> ua(0.5, 3.0), ugap(0.5, 2.0), us(0.5, 2.0), uratio(-3.0, 0.8), um(0.0, 4.0);
  for (int i = 0; i < 5; ++i) {
    const double a = ua(gen), b = a + ugap(gen), s = us(gen), c = s * uratio(gen), m = um(gen);
    CAPTURE(a);
    CAPTURE(b);
    CAPTURE(c);
    CAPTURE(s);
    CAPTURE(m);
    CHECK(relative_error(oracle::kummer_moment_lhs(a, b, c, s, m), oracle::kummer_moment_rhs(a, b, c, s, m)) < 1e-7);
  }
}

}
