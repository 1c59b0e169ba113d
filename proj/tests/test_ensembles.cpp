#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rmt/biortho.hpp"
#include "rmt/ensembles.hpp"
#include "rmt/errors.hpp"
#include "rmt/harness.hpp"

using namespace rmt;
using namespace rmt::ensembles;
using biortho::marginal_density;
using oracle::relative_error;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Generic systems with f_j = x^{j-1}: an independent route to the classical densities.
biortho::BiorthoSystem polynomial_system(int n, biortho::Support support, biortho::WeightFn w) {
  auto fam = [n](double x) {
    std::vector<LogScaled> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) out[j] = LogScaled::from_double(std::pow(x, j));
    return out;
  };
  return biortho::build_system(n, support, std::move(w), fam, biortho::QuadratureMoments{});
}

}  // namespace

TEST_SUITE("ensembles") {

TEST_CASE("parameter validation") {
  CHECK(parse_kind("two-wishart-sum") == Kind::TwoWishartSum);
  CHECK(!parse_kind("wishart").has_value());
  for (Kind k : {Kind::Quotient, Kind::WignerWishartSum, Kind::WignerWishartProduct, Kind::TwoWishartSum}) {
    CHECK(parse_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS((EnsembleSpec{Kind::Quotient, 3, 2, 21, 2.0, 0.2, {}}.validate()), DomainError);
  CHECK_THROWS_AS((EnsembleSpec{Kind::Quotient, 3, 20, 2, 2.0, 0.2, {}}.validate()), DomainError);
  CHECK_THROWS_AS((EnsembleSpec{Kind::Quotient, 3, 20, 21, 2.0, 0.0, {}}.validate()), DomainError);
  CHECK_THROWS_AS((EnsembleSpec{Kind::WignerWishartSum, 3, 0, 4, -1.0, 1.0, {}}.validate()), DomainError);
  CHECK_THROWS_AS((EnsembleSpec{Kind::WignerWishartSum, 0, 0, 4, 1.0, 1.0, {}}.validate()), DomainError);
  CHECK_NOTHROW((EnsembleSpec{Kind::Quotient, 3, 20, 21, 2.0, 0.0, {}}.validate_for_sampling()));
  CHECK_THROWS_AS((EnsembleSpec{Kind::TwoWishartSum, 2, 3, 3, 1.0, 1.0, {1.0, 1.0}}.validate()), DomainError);
  CHECK_THROWS_AS((EnsembleSpec{Kind::TwoWishartSum, 2, 3, 3, 1.0, 1.0, {1.0}}.validate()), DomainError);
  CHECK_THROWS_AS((EnsembleSpec{Kind::TwoWishartSum, 2, 3, 3, 1.0, 1.0, {1.0, -2.0}}.validate()), DomainError);
  CHECK_THROWS_AS(check_sigma(std::vector<double>{1.0, 1.0 + 1e-10}, 2), DomainError);
  CHECK_NOTHROW(check_sigma(std::vector<double>{1.0, 1.0 + 1e-6}, 2));
  CHECK((EnsembleSpec{Kind::TwoWishartSum, 4, 10, 11, 0.25, 1.0, {}}.m()) == 17);
}

TEST_CASE("quotient") {
  SUBCASE("n = 1 closed form and scalar oracle") {
    for (auto family : {QuotientFamily::Conditioned, QuotientFamily::Literal}) {
      SystemOptions opts;
      opts.quotient_family = family;
      const auto sys = quotient_system({Kind::Quotient, 1, 1, 1, 1.0, 1.0, {}}, opts);
      CHECK(marginal_density(sys, 0.0) == doctest::Approx(2.0).epsilon(1e-9));
      for (double x : {0.1, 1.0, 4.0}) {
        const double closed = std::exp(-x) * (1.0 / (1.0 + x) + 1.0 / ((1.0 + x) * (1.0 + x)));
        CHECK(relative_error(marginal_density(sys, x), closed) < 1e-9);
        CHECK(relative_error(marginal_density(sys, x), oracle::quotient_n1(1, 1, 1.0, 1.0, x)) < 1e-8);
      }
    }
  }
  SUBCASE("conditioned and literal families describe the same ensemble") {
    const EnsembleSpec spec{Kind::Quotient, 3, 20, 21, 2.0, 0.2, {}};
    SystemOptions literal;
    literal.quotient_family = QuotientFamily::Literal;
    const auto a = quotient_system(spec);
    const auto b = quotient_system(spec, literal);
    for (double x : {1.0, 5.0, 12.0, 30.0}) CHECK(relative_error(marginal_density(a, x), marginal_density(b, x)) < 1e-6);
    const std::vector<double> pts = {3.0, 9.0};
    CHECK(relative_error(biortho::correlation_r(a, pts), biortho::correlation_r(b, pts)) < 1e-6);
  }
  SUBCASE("literal closed-form moments match quadrature") {
    SystemOptions literal;
    literal.quotient_family = QuotientFamily::Literal;
    const auto sys = quotient_system({Kind::Quotient, 3, 20, 21, 2.0, 0.2, {}}, literal);
    for (int j = 1; j <= 3; ++j) {
      for (int k = 1; k <= 3; ++k) CHECK(biortho::check_moment(sys, j, k).discrepancy < 1e-6);
    }
  }
  SUBCASE("b -> 0 approaches the scaled Wishart density") {
    const auto sys = quotient_system({Kind::Quotient, 4, 14, 9, 1.0, 1e-6, {}});
    double sup = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double x = 0.4 * (i + 1);
      sup = std::max(sup, std::fabs(marginal_density(sys, x) - wishart_marginal(4, 10, x)));
    }
    CHECK(sup <= 1e-2);
  }
}

TEST_CASE("wigner-wishart sum") {
  SUBCASE("n = 1 convolution oracle") {
    const auto sys = wigner_wishart_sum_system({Kind::WignerWishartSum, 1, 0, 1, 1.0, 1.0, {}});
    const double p0 = std::exp(0.25) * std::erfc(0.5) / 2.0;
    CHECK(relative_error(marginal_density(sys, 0.0), p0) < 1e-6);
    for (double x : {-2.0, -0.5, 0.7, 3.0}) {
      CHECK(relative_error(marginal_density(sys, x), oracle::sum_n1(1, 1.0, 1.0, x)) < 1e-6);
    }
  }
  SUBCASE("quadrature family agrees with the 1F1 form on its bounded range") {
    const auto sys = wigner_wishart_sum_system({Kind::WignerWishartSum, 3, 0, 4, 4.0, 1.0, {}});
    for (int j = 1; j <= 3; ++j) {
      // t = x/a - a/2b runs over [-2, 5]
      for (double x : {0.0, 3.0, 10.0, 20.0, 28.0}) {
        CHECK(relative_difference(sys.family(j, x), wigner_wishart_sum_family_kummer(4, j, 4.0, 1.0, x)) < 1e-8);
      }
    }
    // t = -4: the two terms cancel to far below their size
    CHECK_THROWS_AS(wigner_wishart_sum_family_kummer(4, 1, 4.0, 1.0, -8.0), AccuracyLossError);
  }
  SUBCASE("far tails stay finite") {
    const auto sys = wigner_wishart_sum_system({Kind::WignerWishartSum, 5, 0, 7, 0.3, 0.7, {}});
    for (double x : {-1e6, -30.0, 30.0, 100.0, 1e6}) {
      const double p = marginal_density(sys, x);
      CHECK(std::isfinite(p));
      CHECK(p >= 0.0);
    }
  }
  SUBCASE("limits") {
    const auto wishart_like = wigner_wishart_sum_system({Kind::WignerWishartSum, 3, 0, 4, 1e-3, 1.0, {}});
    const auto wigner_like = wigner_wishart_sum_system({Kind::WignerWishartSum, 3, 0, 4, 1.0, 1e-3, {}});
    double sup_w = 0.0, sup_g = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double x = 0.2 * (i + 1);
      sup_w = std::max(sup_w, std::fabs(marginal_density(wishart_like, x) - wishart_marginal(3, 1, x)));
      const double y = -5.0 + 0.1 * i;
      sup_g = std::max(sup_g, std::fabs(marginal_density(wigner_like, y) - gaussian_wigner_marginal(3, y)));
    }
    CHECK(sup_w <= 1e-2);
    CHECK(sup_g <= 1e-2);
  }
}

TEST_CASE("wigner-wishart product") {
  SUBCASE("n = 1 product-density oracle") {
    const auto sys = wigner_wishart_product_system({Kind::WignerWishartProduct, 1, 0, 1, 1.0, 1.0, {}});
    for (double x : {-3.0, -0.4, 0.05, 0.4, 3.0}) {
      CHECK(relative_error(marginal_density(sys, x), oracle::product_n1(1, x)) < 1e-6);
    }
  }
  SUBCASE("symmetry and logarithmic growth at the origin") {
    const auto sys = wigner_wishart_product_system({Kind::WignerWishartProduct, 2, 0, 2, 1.0, 1.0, {}});
    for (int i = 1; i <= 100; ++i) {
      const double x = 0.08 * i;
      CHECK(std::fabs(marginal_density(sys, x) - marginal_density(sys, -x)) <= 1e-9);
    }
    double prev = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const double p = marginal_density(sys, std::pow(10.0, -k));
      CHECK(p > prev);
      prev = p;
    }
    CHECK(std::isfinite(marginal_density(sys, 0.0)));
  }
  SUBCASE("checkerboard moments") {
    const auto sys = wigner_wishart_product_system({Kind::WignerWishartProduct, 3, 0, 5, 1.0, 1.0, {}});
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) CHECK(sys.moment_matrix()(j, k).is_zero() == ((j + k) % 2 == 1));
    }
  }
}

TEST_CASE("two-wishart sum") {
  SUBCASE("n = 1 closed-form convolution") {
    const auto sys = two_wishart_sum_system({Kind::TwoWishartSum, 1, 1, 1, 1.0, 1.0, {2.0}});
    for (double x : {0.1, 1.0, 3.0, 9.0}) {
      CHECK(relative_error(marginal_density(sys, x), std::exp(-x / 2.0) - std::exp(-x)) < 1e-8);
    }
    CHECK(relative_error(marginal_density(sys, 2.0), oracle::two_wishart_n1(1, 1, 1.0, 1.0, 2.0, 2.0)) < 1e-8);
  }
  SUBCASE("permuting sigma leaves the marginal unchanged") {
    const auto a = two_wishart_sum_system({Kind::TwoWishartSum, 4, 10, 11, 0.25, 1.0 / 3.0, {2.5, 1.0 / 3.0, 2.0, 1.75}});
    const auto b = two_wishart_sum_system({Kind::TwoWishartSum, 4, 10, 11, 0.25, 1.0 / 3.0, {1.75, 2.0, 2.5, 1.0 / 3.0}});
    for (double x : {1.0, 4.0, 10.0, 25.0}) CHECK(relative_error(marginal_density(a, x), marginal_density(b, x)) < 1e-10);
  }
  SUBCASE("moments match quadrature, including a/(b sigma) > 2") {
    const auto sys = two_wishart_sum_system({Kind::TwoWishartSum, 3, 4, 5, 1.0, 0.2, {0.5, 1.5, 3.0}});
    for (int j = 1; j <= 3; ++j) {
      for (int k = 1; k <= 3; ++k) CHECK(biortho::check_moment(sys, j, k).discrepancy < 1e-6);
    }
  }
  SUBCASE("coincident sigma is rejected") {
    CHECK_THROWS_AS(two_wishart_sum_system({Kind::TwoWishartSum, 2, 3, 3, 1.0, 1.0, {2.0, 2.0}}), DomainError);
  }
}

TEST_CASE("reference densities") {
  CHECK(wishart_marginal(1, 0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  CHECK(gaussian_wigner_marginal(1, 0.0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(correlated_wishart_marginal(1, 1, std::vector<double>{2.0}, 0.0) == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("wishart against a generic Laguerre-weight system") {
    const auto sys = polynomial_system(3, {0.0, kInf}, [](double x) { return LogScaled::from_log(1, 2.0 * std::log(x) - x); });
    for (double x : {0.3, 2.0, 7.0, 15.0}) CHECK(relative_error(wishart_marginal(3, 2, x), marginal_density(sys, x)) < 1e-9);
    const double mass = oracle::integrate([](double x) { return wishart_marginal(6, 3, x); },
                                          specfun::QuadratureSpec::half_line_positive(1e-12));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("gaussian wigner against a generic Hermite-weight system") {
    const auto sys = polynomial_system(4, {-kInf, kInf}, [](double x) { return LogScaled::from_log(1, -x * x); });
    for (double x : {-2.5, 0.0, 0.4, 1.9}) {
      CHECK(relative_error(gaussian_wigner_marginal(4, x), marginal_density(sys, x)) < 1e-9);
      CHECK(gaussian_wigner_marginal(4, x) == gaussian_wigner_marginal(4, -x));
    }
  }
  SUBCASE("correlated wishart against a generic system") {
    const std::vector<double> sigma = {4.0, 20.0 / 3.0, 2.5, 11.0 / 9.0, 4.0 / 3.0, 7.0 / 8.0};
    auto fam = [sigma](double x) {
      std::vector<LogScaled> out;
      for (double s : sigma) out.push_back(LogScaled::from_log(1, -x / s));
      return out;
    };
    const auto sys = biortho::build_system(6, {0.0, kInf}, [](double x) { return LogScaled::from_log(1, 3.0 * std::log(x)); },
                                           fam, biortho::QuadratureMoments{});
    for (double x : {1.0, 10.0, 40.0}) {
      CHECK(relative_error(correlated_wishart_marginal(6, 9, sigma, x), marginal_density(sys, x)) < 1e-8);
    }
    const double mass = oracle::integrate([&](double x) { return correlated_wishart_marginal(6, 9, sigma, x); },
                                          specfun::QuadratureSpec::half_line_positive(1e-10));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    for (int i = 0; i <= 600; ++i) CHECK(correlated_wishart_marginal(6, 9, sigma, 0.1 * i) >= 0.0);
    CHECK_THROWS_AS(correlated_wishart_marginal(2, 3, std::vector<double>{1.0, 1.0}, 1.0), DomainError);
  }
}

TEST_CASE("closed-form moments agree with quadrature at reference parameter sets") {
  const std::vector<EnsembleSpec> specs = {
      {Kind::Quotient, 4, 14, 9, 1.0, 1.0, {}},
      {Kind::WignerWishartSum, 5, 0, 7, 0.6, 0.4, {}},
      {Kind::WignerWishartProduct, 3, 0, 5, 1.0, 1.0, {}},
      {Kind::TwoWishartSum, 4, 10, 11, 0.25, 1.0, {2.5, 1.0 / 3.0, 2.0, 1.75}},
  };
  for (const auto& spec : specs) {
    SystemOptions opts;
    opts.quotient_family = QuotientFamily::Literal;
    const auto sys = make_system(spec, opts);
    for (int j = 1; j <= spec.n; ++j) {
      for (int k = 1; k <= spec.n; ++k) {
        CAPTURE(to_string(spec.kind));
        CAPTURE(j);
        CAPTURE(k);
        CHECK(biortho::check_moment(sys, j, k).discrepancy < 1e-6);
      }
    }
  }
}

TEST_CASE("nonnegative marginals on typical ranges") {
  const std::vector<std::pair<EnsembleSpec, std::pair<double, double>>> cases = {
      {{Kind::Quotient, 3, 20, 21, 2.0, 0.2, {}}, {0.0, 60.0}},
      {{Kind::WignerWishartSum, 5, 0, 7, 0.9, 0.1, {}}, {-4.0, 6.0}},
      {{Kind::WignerWishartProduct, 7, 0, 8, 1.0, 1.0, {}}, {-30.0, 30.0}},
      {{Kind::TwoWishartSum, 4, 10, 11, 0.25, 1.0 / 3.0, {2.5, 1.0 / 3.0, 2.0, 1.75}}, {0.0, 30.0}},
  };
  for (const auto& [spec, range] : cases) {
    const auto sys = make_system(spec);
    for (int i = 0; i <= 200; ++i) {
      const double x = range.first + (range.second - range.first) * i / 200.0;
      CHECK(marginal_density(sys, x) >= -1e-12);
    }
  }
}

}
