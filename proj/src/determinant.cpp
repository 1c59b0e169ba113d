#include "rmt/determinant.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace rmt::biortho {

namespace {
// Equilibrated log magnitudes below this are handled in long double; growth
// during elimination stays far from the long double exponent limit.
constexpr double kExtendedRange = 5000.0;
}  // namespace

LogScaled stable_log_det(const LogMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) return LogScaled::one();

  for (std::size_t i = 0; i < n; ++i) {
    bool row_any = false, col_any = false;
    for (std::size_t j = 0; j < n; ++j) {
      row_any = row_any || !m(i, j).is_zero();
      col_any = col_any || !m(j, i).is_zero();
    }
    if (!row_any || !col_any) return LogScaled::zero();
  }

  // Alternating row and column sweeps towards zero mean log magnitude. When
  // the scaled entries fit, elimination runs in long double; otherwise on
  // log-scaled entries, which cannot over- or underflow.
  std::vector<double> row_shift(n, 0.0), col_shift(n, 0.0);
  auto lg = [&](std::size_t i, std::size_t j) { return m(i, j).log_magnitude() - row_shift[i] - col_shift[j]; };
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      int count = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (m(i, j).is_zero()) continue;
        total += lg(i, j);
        ++count;
      }
      row_shift[i] += total / count;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double total = 0.0;
      int count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (m(i, j).is_zero()) continue;
        total += lg(i, j);
        ++count;
      }
      col_shift[j] += total / count;
    }
  }
  // Integer shifts make log_magnitude - shift exact in long double, so the
  // scaled entries carry no rounding beyond the final exponential.
  for (std::size_t i = 0; i < n; ++i) {
    row_shift[i] = std::round(row_shift[i]);
    col_shift[i] = std::round(col_shift[i]);
  }

  double widest = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!m(i, j).is_zero()) widest = std::max(widest, std::fabs(lg(i, j)));
    }
  }
  if (widest < kExtendedRange) {
    // extended precision elimination on the equilibrated entries
    std::vector<long double> e(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const LogScaled& v = m(i, j);
        const long double scaled = static_cast<long double>(v.log_magnitude()) - (row_shift[i] + col_shift[j]);
        e[i * n + j] = v.is_zero() ? 0.0L : v.sign() * std::exp(scaled);
      }
    }
    int sign = 1;
    long double log_abs = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t pivot = k;
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::fabs(e[i * n + k]) > std::fabs(e[pivot * n + k])) pivot = i;
      }
      if (e[pivot * n + k] == 0.0L) return LogScaled::zero();
      if (pivot != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(e[k * n + j], e[pivot * n + j]);
        sign = -sign;
      }
      const long double d = e[k * n + k];
      if (d < 0) sign = -sign;
      log_abs += std::log(std::fabs(d));
      for (std::size_t i = k + 1; i < n; ++i) {
        const long double factor = e[i * n + k] / d;
        if (factor == 0.0L) continue;
        for (std::size_t j = k + 1; j < n; ++j) e[i * n + j] -= factor * e[k * n + j];
      }
    }
    double total = static_cast<double>(log_abs);
    for (std::size_t i = 0; i < n; ++i) total += row_shift[i] + col_shift[i];
    if (std::isfinite(total)) return LogScaled::from_log(sign, total);
  }

  std::vector<LogScaled> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const LogScaled& v = m(i, j);
      a[i * n + j] = v.is_zero() ? LogScaled::zero() : LogScaled::from_log(v.sign(), lg(i, j));
    }
  }

  int sign = 1;
  double log_abs = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = n;
    double best = -INFINITY;
    for (std::size_t i = k; i < n; ++i) {
      const LogScaled& v = a[i * n + k];
      if (!v.is_zero() && v.log_magnitude() > best) {
        best = v.log_magnitude();
        pivot = i;
      }
    }
    if (pivot == n) return LogScaled::zero();
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[pivot * n + j]);
      sign = -sign;
    }
    const LogScaled d = a[k * n + k];
    sign *= d.sign();
    log_abs += d.log_magnitude();
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a[i * n + k].is_zero()) continue;
      const LogScaled factor = a[i * n + k] / d;
      for (std::size_t j = k + 1; j < n; ++j) {
        if (!a[k * n + j].is_zero()) a[i * n + j] -= factor * a[k * n + j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) log_abs += row_shift[i] + col_shift[i];
  return LogScaled::from_log(sign, log_abs);
}

}  // namespace rmt::biortho
