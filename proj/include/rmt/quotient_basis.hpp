#pragma once

#include <memory>
#include <vector>

#include "rmt/log_scaled.hpp"

namespace rmt::ensembles {

/// Basis phi_0..phi_{n-1} of the span of the quotient family
///   f_j(x) = U(n_B - j + 1, n_A + n_B - j + 2; 1/b + x/a),
/// normalized so that phi_k(x) = x^k + O(x^n) for small b x / a.
///
/// With s = n_B - n and y = 1/(1 + b x / a), each
///   psi_i(x) = Gamma(s+i+1) b^{-(s+i+1)} f_{n-i}(x)
///            = sum_q C(n_A, q) b^q Gamma(s+i+q+1) y^{s+i+q+1}
/// is a polynomial in y. phi = T psi with T = D N^{-1}, N the Hankel matrix of
/// nu_m = sum_q C(n_A, q) b^q Gamma(s+m+q+1) and D = diag((-1)^k k! (a/b)^k).
/// Coefficients and evaluation use 100-digit arithmetic.
class QuotientBasis {
 public:
  QuotientBasis(int n, int n_A, int n_B, double a, double b);

  int n() const;
  /// phi_0(x), ..., phi_{n-1}(x).
  std::vector<LogScaled> family(double x) const;
  /// int_0^inf e^{-x/a} x^{n_A-n} phi_{row}(x) x^{col} dx, 0-based.
  LogScaled moment(int row, int col) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace rmt::ensembles
