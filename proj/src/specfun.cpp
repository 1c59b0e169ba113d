#include "rmt/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rmt/errors.hpp"

namespace rmt::specfun {

namespace {

bool is_nonpositive_integer(double x) { return x <= 0.0 && std::floor(x) == x; }

// Generalized hypergeometric series pFq(num; den; z) in log-scaled form.
// `max_terms` bounds the iteration; a loss of more than 6 digits to
// cancellation is reported as AccuracyLossError.
LogScaled hypergeometric_series(std::span<const double> num, std::span<const double> den, double z,
                                const char* name, long max_terms = 200000) {
  // Last index at which a numerator Pochhammer symbol is still nonzero.
  long last_term = std::numeric_limits<long>::max();
  for (double a : num) {
    if (is_nonpositive_integer(a)) last_term = std::min(last_term, static_cast<long>(-a));
  }
  for (double b : den) {
    if (is_nonpositive_integer(b) && static_cast<long>(-b) < last_term) {
      throw DomainError(std::string(name) + ": denominator parameter is a non-positive integer");
    }
  }
  if (z == 0.0 || last_term == 0) return LogScaled::one();

  constexpr double kRescale = 1e200;
  const double log_rescale = std::log(kRescale);
  double term = 1.0;
  double sum = 1.0;
  double max_abs_term = 1.0;
  double log_scale = 0.0;
  int small_run = 0;
  for (long k = 0; k < max_terms; ++k) {
    if (k >= last_term) {
      small_run = 3;
      break;
    }
    double ratio = z / static_cast<double>(k + 1);
    for (double a : num) ratio *= (a + static_cast<double>(k));
    for (double b : den) ratio /= (b + static_cast<double>(k));
    term *= ratio;
    sum += term;
    max_abs_term = std::max(max_abs_term, std::fabs(term));
    if (std::fabs(sum) > kRescale || std::fabs(term) > kRescale) {
      term /= kRescale;
      sum /= kRescale;
      max_abs_term /= kRescale;
      log_scale += log_rescale;
    }
    const double abs_ratio = std::fabs(ratio);
    // Geometric tail bound once the terms decay.
    if (abs_ratio < 1.0) {
      const double tail = std::fabs(term) * abs_ratio / (1.0 - abs_ratio);
      if (tail <= 1e-17 * std::fabs(sum)) {
        if (++small_run >= 2) break;
      } else {
        small_run = 0;
      }
    } else {
      small_run = 0;
    }
  }
  if (small_run < 2) {
    throw AccuracyLossError(std::string(name) + ": series did not converge within " + std::to_string(max_terms) +
                            " terms");
  }
  if (sum == 0.0 || max_abs_term > 1e6 * std::fabs(sum)) {
    throw AccuracyLossError(std::string(name) + ": cancellation in series (z = " + std::to_string(z) + ")");
  }
  LogScaled out = LogScaled::from_double(sum);
  return out * LogScaled::from_log(1, log_scale);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  int sign = 1;
  return ::lgamma_r(x, &sign);
}

double multivariate_log_gamma(int n, double alpha) {
  if (n < 1) throw DomainError("multivariate_log_gamma: n must be >= 1");
  if (!(alpha > n - 1)) throw DomainError("multivariate_log_gamma: alpha must exceed n - 1");
  double out = 0.5 * n * (n - 1) * std::log(std::numbers::pi);
  for (int j = 1; j <= n; ++j) out += log_gamma(alpha - j + 1);
  return out;
}

double laguerre(int mu, double s, double x) {
  if (mu < 0) throw DomainError("laguerre: negative degree");
  if (mu == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + s - x;
  for (int k = 1; k < mu; ++k) {
    const double next = ((2.0 * k + 1.0 + s - x) * cur - (k + s) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite(int mu, double x) {
  if (mu < 0) throw DomainError("hermite: negative degree");
  if (mu == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int k = 1; k < mu; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

LogScaled kummer_1f1(double a, double b, double z) {
  if (is_nonpositive_integer(b)) throw DomainError("kummer_1f1: b is a non-positive integer");
  if (z == 0.0) return LogScaled::one();
  if (std::fabs(z) > 50.0 && b > a && a > 0.0) {
    // Gamma(b) / (Gamma(a) Gamma(b-a)) int_0^1 e^{zt} t^{a-1} (1-t)^{b-a-1} dt, with
    // t -> 1 - t for z > 0 so the peak sits at the resolved end of the interval.
    const double p = z > 0.0 ? b - a - 1.0 : a - 1.0;
    const double q = z > 0.0 ? a - 1.0 : b - a - 1.0;
    const double rate = std::fabs(z);
    auto integrand = [p, q, rate](double t) {
      return LogScaled::from_log(1, -rate * t + p * std::log(t) + q * std::log1p(-t));
    };
    const double log_pre = log_gamma(b) - log_gamma(a) - log_gamma(b - a) + (z > 0.0 ? z : 0.0);
    return LogScaled::from_log(1, log_pre) * integrate(integrand, QuadratureSpec::bounded(0.0, 1.0, 1e-12));
  }
  // Negative argument with positive b - a and b: the transformed series has
  // only positive terms.
  if (z < 0.0 && b > 0.0 && b - a > 0.0 && !is_nonpositive_integer(a)) {
    const double num[] = {b - a};
    const double den[] = {b};
    return LogScaled::from_log(1, z) * hypergeometric_series(num, den, -z, "kummer_1f1");
  }
  const double num[] = {a};
  const double den[] = {b};
  return hypergeometric_series(num, den, z, "kummer_1f1");
}

LogScaled tricomi_u(double a, double b, double z, double relative_tolerance) {
  if (!(a > 0.0)) throw DomainError("tricomi_u: a must be positive");
  if (!(z > 0.0)) throw DomainError("tricomi_u: z must be positive");
  const double c = b - a - 1.0;
  auto integrand = [a, c, z](double t) {
    return LogScaled::from_log(1, (a - 1.0) * std::log(t) - z * t + c * std::log1p(t));
  };
  const LogScaled integral = integrate(integrand, QuadratureSpec::half_line_positive(relative_tolerance));
  return integral / LogScaled::from_log(1, log_gamma(a));
}

LogScaled gauss_2f1(double a, double b, double c, double z) {
  if (!(z < 1.0)) throw DomainError("gauss_2f1: argument must be < 1");
  if (is_nonpositive_integer(c)) throw DomainError("gauss_2f1: c is a non-positive integer");
  if (z < 0.0) {
    // Pfaff: 2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)).
    const double x = z / (z - 1.0);
    const double num[] = {a, c - b};
    const double den[] = {c};
    return LogScaled::from_log(1, -a * std::log1p(-z)) *
           hypergeometric_series(num, den, x, "gauss_2f1", 5000000);
  }
  const double num[] = {a, b};
  const double den[] = {c};
  return hypergeometric_series(num, den, z, "gauss_2f1", 5000000);
}

LogScaled hyp_2f2(double a1, double a2, double b1, double b2, double z) {
  const double num[] = {a1, a2};
  const double den[] = {b1, b2};
  return hypergeometric_series(num, den, z, "hyp_2f2");
}

}  // namespace rmt::specfun
