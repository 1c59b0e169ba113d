#include "rmt/quotient_basis.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <utility>
#include <vector>

#include "rmt/errors.hpp"

namespace rmt::ensembles {

namespace {

using Real = boost::multiprecision::cpp_bin_float_100;
using Matrix = std::vector<std::vector<Real>>;

Real factorial(int m) {
  Real out = 1;
  for (int k = 2; k <= m; ++k) out *= k;
  return out;
}

Real binomial(int n, int k) {
  Real out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

Real rising(int x, int l) {
  Real out = 1;
  for (int i = 0; i < l; ++i) out *= (x + i);
  return out;
}

LogScaled to_log_scaled(const Real& v) {
  if (v == 0) return LogScaled::zero();
  const int sign = v < 0 ? -1 : 1;
  return LogScaled::from_log(sign, static_cast<double>(log(abs(v))));
}

// Inverse by Gauss-Jordan with partial pivoting.
Matrix invert(Matrix m) {
  const std::size_t n = m.size();
  Matrix inv(n, std::vector<Real>(n, Real(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (abs(m[r][c]) > abs(m[p][c])) p = r;
    }
    if (m[p][c] == 0) throw SingularSystemError("QuotientBasis: singular Hankel matrix");
    std::swap(m[p], m[c]);
    std::swap(inv[p], inv[c]);
    const Real piv = m[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      m[c][k] /= piv;
      inv[c][k] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      const Real f = m[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        m[r][k] -= f * m[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

}  // namespace

struct QuotientBasis::Impl {
  int n;
  int s;
  Real a;
  Real b;
  // poly[k][d]: phi_k(x) = y^{s+1} sum_d poly[k][d] y^d
  Matrix poly;
  Matrix moments;
};

QuotientBasis::QuotientBasis(int n, int n_A, int n_B, double a, double b) {
  if (n < 1 || n_A < n || n_B < n) throw DomainError("QuotientBasis: need n >= 1 and n_A, n_B >= n");
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("QuotientBasis: a and b must be positive");
  auto impl = std::make_shared<Impl>();
  impl->n = n;
  impl->s = n_B - n;
  impl->a = a;
  impl->b = b;
  const int s = impl->s;
  const Real A = a;
  const Real B = b;

  std::vector<Real> b_pow(static_cast<std::size_t>(std::max(n_A, n) + 1));
  b_pow[0] = 1;
  for (std::size_t q = 1; q < b_pow.size(); ++q) b_pow[q] = b_pow[q - 1] * B;

  // c[i][q] = C(n_A, q) b^q Gamma(s+i+q+1)
  Matrix c(n, std::vector<Real>(n_A + 1));
  for (int i = 0; i < n; ++i) {
    for (int q = 0; q <= n_A; ++q) c[i][q] = binomial(n_A, q) * b_pow[q] * factorial(s + i + q);
  }

  std::vector<Real> nu(static_cast<std::size_t>(2 * n - 1), Real(0));
  for (int m = 0; m < 2 * n - 1; ++m) {
    for (int q = 0; q <= n_A; ++q) nu[m] += binomial(n_A, q) * b_pow[q] * factorial(s + m + q);
  }
  Matrix hankel(n, std::vector<Real>(n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) hankel[i][k] = nu[i + k];
  Matrix t = invert(std::move(hankel));
  Real ratio = A / B;
  Real d = 1;
  for (int k = 0; k < n; ++k) {
    if (k > 0) d *= -Real(k) * ratio;
    for (auto& v : t[k]) v *= d;
  }

  impl->poly.assign(n, std::vector<Real>(n + n_A, Real(0)));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int q = 0; q <= n_A; ++q) impl->poly[k][i + q] += t[k][i] * c[i][q];
    }
  }

  // psi moments: Gamma(s+i+1) a^{A_k} Gamma(A_k) sum_l C(n-k, l) (s+i+1)_l b^l, A_k = n_A - n + k
  Matrix h_psi(n, std::vector<Real>(n));
  for (int i = 0; i < n; ++i) {
    for (int k = 1; k <= n; ++k) {
      const int ak = n_A - n + k;
      Real sum = 0;
      for (int l = 0; l <= n - k; ++l) sum += binomial(n - k, l) * rising(s + i + 1, l) * b_pow[l];
      h_psi[i][k - 1] = factorial(s + i) * pow(A, ak) * factorial(ak - 1) * sum;
    }
  }
  impl->moments.assign(n, std::vector<Real>(n, Real(0)));
  for (int k = 0; k < n; ++k)
    for (int col = 0; col < n; ++col)
      for (int i = 0; i < n; ++i) impl->moments[k][col] += t[k][i] * h_psi[i][col];

  impl_ = std::move(impl);
}

int QuotientBasis::n() const { return impl_->n; }

std::vector<LogScaled> QuotientBasis::family(double x) const {
  const Impl& im = *impl_;
  const Real y = 1 / (1 + im.b * Real(x) / im.a);
  Real lead = 1;
  for (int e = 0; e <= im.s; ++e) lead *= y;
  std::vector<LogScaled> out(static_cast<std::size_t>(im.n));
  for (int k = 0; k < im.n; ++k) {
    const auto& p = im.poly[k];
    Real acc = 0;
    for (std::size_t d = p.size(); d-- > 0;) acc = acc * y + p[d];
    out[static_cast<std::size_t>(k)] = to_log_scaled(acc * lead);
  }
  return out;
}

LogScaled QuotientBasis::moment(int row, int col) const {
  if (row < 0 || row >= impl_->n || col < 0 || col >= impl_->n) throw DomainError("QuotientBasis::moment: index");
  return to_log_scaled(impl_->moments[row][col]);
}

}  // namespace rmt::ensembles
