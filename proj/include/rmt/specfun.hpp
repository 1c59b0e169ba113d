#pragma once

#include "rmt/log_scaled.hpp"
#include "rmt/quadrature.hpp"

namespace rmt::specfun {

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// ln Gamma_n(alpha) = n(n-1)/2 ln(pi) + sum_{j=1..n} ln Gamma(alpha - j + 1), alpha > n - 1.
double multivariate_log_gamma(int n, double alpha);

/// Associated Laguerre polynomial L_mu^{(s)}(x) by the three-term recurrence.
double laguerre(int mu, double s, double x);

/// Physicists' Hermite polynomial H_mu(x) by the three-term recurrence.
double hermite(int mu, double x);

/// Kummer's confluent hypergeometric function 1F1(a; b; z).
///
/// Summed as a power series, after Kummer's transformation
/// 1F1(a; b; z) = e^z 1F1(b - a; b; -z) whenever that removes sign changes
/// from the terms. For |z| > 50 with b > a > 0 the Euler integral
/// representation is integrated instead. Series with cancelling terms are
/// accepted only while the largest term stays within 1e6 of the sum; beyond
/// that AccuracyLossError is thrown.
LogScaled kummer_1f1(double a, double b, double z);

/// Tricomi's confluent hypergeometric function U(a, b; z), a > 0, z > 0, from
///   U(a,b;z) = Gamma(a)^{-1} int_0^inf t^{a-1} e^{-zt} (1+t)^{b-a-1} dt.
LogScaled tricomi_u(double a, double b, double z, double relative_tolerance = 1e-12);

/// Gauss hypergeometric 2F1(a, b; c; z) for z < 1. Negative arguments go
/// through the Pfaff transformation onto [0, 1).
LogScaled gauss_2f1(double a, double b, double c, double z);

/// Generalized hypergeometric 2F2(a1, a2; b1, b2; z) by direct summation.
///
/// A non-positive-integer denominator parameter is accepted when a
/// numerator parameter truncates the series before the pole is reached.
LogScaled hyp_2f2(double a1, double a2, double b1, double b2, double z);

}  // namespace rmt::specfun
