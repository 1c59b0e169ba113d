#include "rmt/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "rmt/errors.hpp"
#include "rmt/quotient_basis.hpp"
#include "rmt/specfun.hpp"

namespace rmt::ensembles {

namespace {

using biortho::BiorthoSystem;
using biortho::ClosedFormMoments;
using biortho::Support;
using specfun::log_gamma;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFamilyTolerance = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError("EnsembleSpec: " + what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }
bool finite_nonnegative(double x) { return std::isfinite(x) && x >= 0.0; }

// x^e as LogScaled for integer e >= 0; sign follows x.
LogScaled signed_power(double x, int e) {
  if (e == 0) return LogScaled::one();
  if (x == 0.0) return LogScaled::zero();
  const int sign = (x < 0.0 && e % 2 != 0) ? -1 : 1;
  return LogScaled::from_log(sign, e * std::log(std::fabs(x)));
}

LogScaled gamma_ls(double x) { return LogScaled::from_log(1, log_gamma(x)); }

// int_0^inf t^p e^{-t^2 + c t - d / t} dt with d >= 0. For c > 0 the square
// is completed so the exponent near the peak t = c/2 carries no cancellation.
LogScaled exponential_integral(double p, double c, double d) {
  const double shift = c > 0.0 ? 0.5 * c : 0.0;
  auto exponent = [p, c, d, shift](double t) {
    double e = shift > 0.0 ? -(t - shift) * (t - shift) : -t * t + c * t;
    if (p != 0.0) e += p * std::log(t);
    if (d != 0.0) e -= d / t;
    return e;
  };
  const LogScaled factor = LogScaled::from_log(1, shift * shift);
  if (shift <= 4.0) {
    auto integrand = [&](double t) { return LogScaled::from_log(1, exponent(t)); };
    return factor * specfun::integrate(integrand, specfun::QuadratureSpec::half_line_positive(kFamilyTolerance));
  }
  // Far peak: integrate in u = t - shift so resolution near the peak is absolute.
  auto shifted = [&](double u) {
    const double t = shift + u;
    if (t <= 0.0) return LogScaled::zero();
    double e = -u * u;
    if (p != 0.0) e += p * std::log(t);
    if (d != 0.0) e -= d / t;
    return LogScaled::from_log(1, e);
  };
  const LogScaled left = specfun::integrate(shifted, specfun::QuadratureSpec::bounded(-shift, 0.0, kFamilyTolerance));
  const LogScaled right = specfun::integrate(shifted, specfun::QuadratureSpec::half_line_positive(kFamilyTolerance));
  return factor * (left + right);
}

}  // namespace

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::Quotient:
      return "quotient";
    case Kind::WignerWishartSum:
      return "wigner-wishart-sum";
    case Kind::WignerWishartProduct:
      return "wigner-wishart-product";
    case Kind::TwoWishartSum:
      return "two-wishart-sum";
  }
  return "unknown";
}

std::optional<Kind> parse_kind(std::string_view name) {
  for (Kind k : {Kind::Quotient, Kind::WignerWishartSum, Kind::WignerWishartProduct, Kind::TwoWishartSum}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

void check_sigma(std::span<const double> sigma, int n) {
  if (static_cast<int>(sigma.size()) != n) {
    throw DomainError("sigma must have exactly n = " + std::to_string(n) + " entries");
  }
  double largest = 0.0;
  for (double s : sigma) {
    if (!finite_positive(s)) throw DomainError("sigma entries must be positive and finite");
    largest = std::max(largest, s);
  }
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    for (std::size_t j = i + 1; j < sigma.size(); ++j) {
      if (std::fabs(sigma[i] - sigma[j]) <= 1e-8 * largest) {
        std::ostringstream msg;
        msg << "sigma entries " << i + 1 << " and " << j + 1 << " are degenerate";
        throw DomainError(msg.str());
      }
    }
  }
}

void EnsembleSpec::validate() const {
  require(n >= 1, "n must be >= 1");
  require(n_B >= n, "n_B must be >= n");
  if (uses_n_A()) require(n_A >= n, "n_A must be >= n");
  if (uses_weights()) {
    require(finite_positive(a), "a must be positive");
    require(finite_positive(b), "b must be positive");
  }
  if (kind == Kind::TwoWishartSum) {
    check_sigma(sigma, n);
    for (double s : sigma) require(1.0 - a / (b * s) < 1.0, "hypergeometric argument must be < 1");
  }
}

void EnsembleSpec::validate_for_sampling() const {
  require(n >= 1, "n must be >= 1");
  require(n_B >= n, "n_B must be >= n");
  if (uses_n_A()) require(n_A >= n, "n_A must be >= n");
  if (uses_weights()) {
    require(finite_nonnegative(a), "a must be >= 0");
    require(finite_nonnegative(b), "b must be >= 0");
  }
  if (kind == Kind::TwoWishartSum) {
    require(static_cast<int>(sigma.size()) == n, "sigma must have n entries");
    for (double s : sigma) require(finite_positive(s), "sigma entries must be positive");
  }
}

Support support_of(Kind kind) {
  switch (kind) {
    case Kind::Quotient:
    case Kind::TwoWishartSum:
      return {0.0, kInf};
    case Kind::WignerWishartSum:
    case Kind::WignerWishartProduct:
      return {-kInf, kInf};
  }
  return {-kInf, kInf};
}

BiorthoSystem quotient_system(const EnsembleSpec& spec, const SystemOptions& options) {
  if (spec.kind != Kind::Quotient) throw DomainError("quotient_system: wrong kind");
  spec.validate();
  const int n = spec.n;
  const int n_A = spec.n_A;
  const int n_B = spec.n_B;
  const double a = spec.a;
  const double b = spec.b;

  // w = e^{-x/a} x^{n_A - n}
  auto weight = [a, s = n_A - n](double x) {
    if (x < 0.0) return LogScaled::zero();
    return LogScaled::from_log(1, -x / a) * signed_power(x, s);
  };

  if (options.quotient_family == QuotientFamily::Conditioned) {
    const QuotientBasis basis(n, n_A, n_B, a, b);
    auto family = [basis](double x) { return basis.family(x); };
    auto moment = [basis](int j, int k) { return basis.moment(j - 1, k - 1); };
    return biortho::build_system(n, support_of(spec.kind), weight, family, ClosedFormMoments{moment}, options.build);
  }

  // f_j = U(n_B - j + 1, n_A + n_B - j + 2; 1/b + x/a)
  auto family = [n, n_A, n_B, a, b](double x) {
    std::vector<LogScaled> out(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
      out[j - 1] = specfun::tricomi_u(n_B - j + 1.0, n_A + n_B - j + 2.0, 1.0 / b + x / a);
    }
    return out;
  };
  // h = a^{n_A-n+k} Gamma(n_A-n+k) U(n_B-j+1, n_B+n-j-k+2; 1/b)
  auto moment = [n, n_A, n_B, a, b](int j, int k) {
    const double e = n_A - n + k;
    return LogScaled::from_log(1, e * std::log(a) + log_gamma(e)) *
           specfun::tricomi_u(n_B - j + 1.0, n_B + n - j - k + 2.0, 1.0 / b);
  };
  return biortho::build_system(n, support_of(spec.kind), weight, family, ClosedFormMoments{moment}, options.build);
}

LogScaled wigner_wishart_sum_family_kummer(int n_B, int j, double a, double b, double lambda) {
  const double p = n_B - j;
  const double t = lambda / a - a / (2.0 * b);
  const double t2 = t * t;
  LogScaled even = LogScaled::from_double(0.5) * gamma_ls((p + 1.0) / 2.0) * specfun::kummer_1f1((p + 1.0) / 2.0, 0.5, t2);
  LogScaled odd = LogScaled::from_double(t) * gamma_ls((p + 2.0) / 2.0) * specfun::kummer_1f1((p + 2.0) / 2.0, 1.5, t2);
  const LogScaled sum = even + odd;
  const double largest = std::max(even.log_magnitude(), odd.log_magnitude());
  if (sum.is_zero() || sum.log_magnitude() < largest + std::log(1e-6)) {
    throw AccuracyLossError("wigner_wishart_sum_family_kummer: cancellation between the two terms");
  }
  return sum;
}

BiorthoSystem wigner_wishart_sum_system(const EnsembleSpec& spec, const SystemOptions& options) {
  if (spec.kind != Kind::WignerWishartSum) throw DomainError("wigner_wishart_sum_system: wrong kind");
  spec.validate();
  const int n = spec.n;
  const int n_B = spec.n_B;
  const double a = spec.a;
  const double b = spec.b;

  auto weight = [a](double x) { return LogScaled::from_log(1, -(x / a) * (x / a)); };
  // f_j = int_0^inf mu^{n_B-j} e^{-mu^2 + (2x/a - a/b) mu} dmu
  auto family = [n, n_B, a, b](double x) {
    std::vector<LogScaled> out(static_cast<std::size_t>(n));
    const double c = 2.0 * x / a - a / b;
    for (int j = 1; j <= n; ++j) out[j - 1] = exponential_integral(n_B - j, c, 0.0);
    return out;
  };
  // h = sqrt(pi) b^N / a^{n_B-j} Gamma(N) 2F2((1-k)/2, (2-k)/2; (1-N)/2, (2-N)/2; a^2/4b^2), N = n_B-j+k
  auto moment = [n_B, a, b](int j, int k) {
    const int big_n = n_B - j + k;
    const double log_pre =
        0.5 * std::log(std::numbers::pi) + big_n * std::log(b) - (n_B - j) * std::log(a) + log_gamma(big_n);
    return LogScaled::from_log(1, log_pre) * specfun::hyp_2f2((1.0 - k) / 2.0, (2.0 - k) / 2.0, (1.0 - big_n) / 2.0,
                                                              (2.0 - big_n) / 2.0, a * a / (4.0 * b * b));
  };
  return biortho::build_system(n, support_of(spec.kind), weight, family, ClosedFormMoments{moment}, options.build);
}

BiorthoSystem wigner_wishart_product_system(const EnsembleSpec& spec, const SystemOptions& options) {
  if (spec.kind != Kind::WignerWishartProduct) throw DomainError("wigner_wishart_product_system: wrong kind");
  spec.validate();
  const int n = spec.n;
  const int n_B = spec.n_B;
  const int s = n_B - n;

  auto weight = [s](double x) { return signed_power(x, s); };
  // f_j = int_0^u mu^p e^{-mu^2 - x/mu} dmu, p = n - n_B + j - 2, u = +inf for x > 0 and -inf for x < 0.
  auto family = [n, s](double x) {
    std::vector<LogScaled> out(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
      const int p = j - 2 - s;
      if (x > 0.0) {
        out[j - 1] = exponential_integral(p, 0.0, x);
      } else if (x < 0.0) {
        // mu = -t: dmu = -dt, mu^p = (-1)^p t^p
        const LogScaled v = exponential_integral(p, 0.0, -x);
        out[j - 1] = (p % 2 == 0) ? -v : v;
      } else {
        if (p < 0) throw SupportError("wigner_wishart_product_system: family is singular at 0");
        out[j - 1] = LogScaled::from_double(0.5) * gamma_ls((p + 1.0) / 2.0);
      }
    }
    return out;
  };
  // h = (1 + (-1)^{j+k})/2 Gamma(n_B - n + k) Gamma((j+k-1)/2)
  auto moment = [s](int j, int k) {
    if ((j + k) % 2 != 0) return LogScaled::zero();
    return gamma_ls(s + k) * gamma_ls((j + k - 1.0) / 2.0);
  };
  SystemOptions opts = options;
  if (std::find(opts.build.singular_points.begin(), opts.build.singular_points.end(), 0.0) ==
      opts.build.singular_points.end()) {
    opts.build.singular_points.push_back(0.0);
  }
  return biortho::build_system(n, support_of(spec.kind), weight, family, ClosedFormMoments{moment}, opts.build);
}

BiorthoSystem two_wishart_sum_system(const EnsembleSpec& spec, const SystemOptions& options) {
  if (spec.kind != Kind::TwoWishartSum) throw DomainError("two_wishart_sum_system: wrong kind");
  spec.validate();
  const int n = spec.n;
  const int m = spec.m();
  const double alpha = spec.n_B - n + 1.0;
  const double a = spec.a;
  const double b = spec.b;
  std::vector<double> rate(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) rate[j] = 1.0 / a - 1.0 / (b * spec.sigma[j]);

  // w = x^m e^{-x/a}
  auto weight = [m, a](double x) {
    if (x < 0.0) return LogScaled::zero();
    return LogScaled::from_log(1, -x / a) * signed_power(x, m);
  };
  // f_j = 1F1(n_B - n + 1; m + 1; (1/a - 1/(b sigma_j)) x)
  auto family = [rate, alpha, m](double x) {
    std::vector<LogScaled> out(rate.size());
    for (std::size_t j = 0; j < rate.size(); ++j) out[j] = specfun::kummer_1f1(alpha, m + 1.0, rate[j] * x);
    return out;
  };
  // h = a^{m+k} Gamma(m+k) 2F1(n_B - n + 1, m + k; m + 1; 1 - a/(b sigma_j))
  auto moment = [rate, alpha, m, a](int j, int k) {
    const double z = a * rate[j - 1];
    return LogScaled::from_log(1, (m + k) * std::log(a) + log_gamma(m + k)) *
           specfun::gauss_2f1(alpha, m + k, m + 1.0, z);
  };
  return biortho::build_system(n, support_of(spec.kind), weight, family, ClosedFormMoments{moment}, options.build);
}

BiorthoSystem make_system(const EnsembleSpec& spec, const SystemOptions& options) {
  switch (spec.kind) {
    case Kind::Quotient:
      return quotient_system(spec, options);
    case Kind::WignerWishartSum:
      return wigner_wishart_sum_system(spec, options);
    case Kind::WignerWishartProduct:
      return wigner_wishart_product_system(spec, options);
    case Kind::TwoWishartSum:
      return two_wishart_sum_system(spec, options);
  }
  throw DomainError("make_system: unknown kind");
}

}  // namespace rmt::ensembles
