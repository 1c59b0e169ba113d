#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>

namespace rmt {

/// A real number stored as sign and natural-log magnitude.
///
/// Products and quotients are exact in sign and additive in log magnitude,
/// so values such as Gamma(60) * a^60 or e^{-1000} travel through the
/// determinant and normalization code without over- or underflow. The zero
/// value has sign 0 and log magnitude -inf; no other combination uses
/// either.
class LogScaled {
 public:
  constexpr LogScaled() = default;

  /// Build from sign and log magnitude. A non-positive sign with a finite
  /// log magnitude is normalized; sign 0 always maps to the canonical zero.
  static LogScaled from_log(int sign, double log_magnitude);
  static LogScaled from_double(double x);
  static constexpr LogScaled zero() { return LogScaled{}; }
  static LogScaled one() { return from_log(1, 0.0); }

  int sign() const { return sign_; }
  double log_magnitude() const { return log_mag_; }
  bool is_zero() const { return sign_ == 0; }

  /// Exponentiated value; may overflow to +-inf or underflow to 0.
  double to_double() const;

  LogScaled operator-() const;
  LogScaled& operator*=(const LogScaled& o);
  LogScaled& operator/=(const LogScaled& o);
  LogScaled& operator+=(const LogScaled& o);
  LogScaled& operator-=(const LogScaled& o) { return *this += -o; }

  LogScaled pow(double exponent) const;

  friend LogScaled operator*(LogScaled a, const LogScaled& b) { return a *= b; }
  friend LogScaled operator/(LogScaled a, const LogScaled& b) { return a /= b; }
  friend LogScaled operator+(LogScaled a, const LogScaled& b) { return a += b; }
  friend LogScaled operator-(LogScaled a, const LogScaled& b) { return a -= b; }
  friend bool operator==(const LogScaled&, const LogScaled&) = default;

 private:
  int sign_ = 0;
  double log_mag_ = -std::numeric_limits<double>::infinity();
};

std::ostream& operator<<(std::ostream& os, const LogScaled& v);

/// |a - b| / |b| computed in the log domain; returns +inf when signs differ
/// and b is nonzero, and 0 when both are zero.
double relative_difference(const LogScaled& a, const LogScaled& b);

}  // namespace rmt
