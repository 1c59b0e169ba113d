#pragma once

#include <functional>

#include "rmt/log_scaled.hpp"

namespace rmt::specfun {

enum class Domain { HalfLinePositive, HalfLineNegative, FullLine, Bounded };

struct QuadratureSpec {
  Domain domain = Domain::HalfLinePositive;
  double lo = 0.0;  // Bounded only
  double hi = 0.0;  // Bounded only
  double relative_tolerance = 1e-11;
  int max_subdivisions = 2000;

  static QuadratureSpec half_line_positive(double rtol = 1e-11);
  static QuadratureSpec half_line_negative(double rtol = 1e-11);
  static QuadratureSpec full_line(double rtol = 1e-11);
  static QuadratureSpec bounded(double lo, double hi, double rtol = 1e-11);

  /// Throws DomainError unless 0 < relative_tolerance < 1, max_subdivisions >= 1
  /// and lo < hi for bounded domains.
  void validate() const;
};

/// Integrand returning its value in sign/log-magnitude form.
using LogIntegrand = std::function<LogScaled(double)>;

struct IntegrationResult {
  LogScaled value;
  LogScaled absolute;          // integral of |f|
  double relative_error = 0;   // estimated |error| / |value|
  int subdivisions = 0;
  int evaluations = 0;
};

/// Max-factored adaptive Gauss-Kronrod (10/21) quadrature.
///
/// Infinite and semi-infinite ranges are mapped onto the real line by
/// t = +-e^s (a full line is split at the origin into two such halves), and
/// a bounded range by t = lo + (hi - lo)(1 + tanh s)/2. The log of the mapped
/// integrand is scanned to locate its maximum M, the region where it exceeds
/// M - 45 is bracketed, and the panels are integrated on exp(log f - M), so
/// the kernel sees O(1) values no matter how large or small f is.
///
/// Throws ConvergenceError when max_subdivisions bisections do not reach
/// the tolerance.
IntegrationResult integrate_detailed(const LogIntegrand& f, const QuadratureSpec& spec);

LogScaled integrate(const LogIntegrand& f, const QuadratureSpec& spec);

/// Convenience wrapper for ordinary real-valued integrands.
double integrate_real(const std::function<double(double)>& f, const QuadratureSpec& spec);

}  // namespace rmt::specfun
