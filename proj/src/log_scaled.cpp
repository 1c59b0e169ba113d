#include "rmt/log_scaled.hpp"

#include <ostream>

#include "rmt/errors.hpp"

namespace rmt {

LogScaled LogScaled::from_log(int sign, double log_magnitude) {
  LogScaled v;
  if (std::isnan(log_magnitude)) throw DomainError("LogScaled: NaN log magnitude");
  if (sign == 0 || log_magnitude == -std::numeric_limits<double>::infinity()) return v;
  v.sign_ = sign > 0 ? 1 : -1;
  v.log_mag_ = log_magnitude;
  return v;
}

LogScaled LogScaled::from_double(double x) {
  if (std::isnan(x)) throw DomainError("LogScaled: NaN input");
  if (x == 0.0) return LogScaled{};
  return from_log(x > 0 ? 1 : -1, std::log(std::fabs(x)));
}

double LogScaled::to_double() const {
  if (sign_ == 0) return 0.0;
  return sign_ * std::exp(log_mag_);
}

LogScaled LogScaled::operator-() const {
  LogScaled v = *this;
  v.sign_ = -v.sign_;
  return v;
}

LogScaled& LogScaled::operator*=(const LogScaled& o) {
  if (sign_ == 0 || o.sign_ == 0) {
    *this = LogScaled{};
    return *this;
  }
  sign_ *= o.sign_;
  log_mag_ += o.log_mag_;
  return *this;
}

LogScaled& LogScaled::operator/=(const LogScaled& o) {
  if (o.sign_ == 0) throw DomainError("LogScaled: division by zero");
  if (sign_ == 0) return *this;
  sign_ *= o.sign_;
  log_mag_ -= o.log_mag_;
  return *this;
}

LogScaled& LogScaled::operator+=(const LogScaled& o) {
  if (o.sign_ == 0) return *this;
  if (sign_ == 0) {
    *this = o;
    return *this;
  }
  const bool self_larger = log_mag_ >= o.log_mag_;
  const LogScaled& big = self_larger ? *this : o;
  const LogScaled& small = self_larger ? o : *this;
  const double ratio = std::exp(small.log_mag_ - big.log_mag_);
  const double factor = big.sign_ == small.sign_ ? 1.0 + ratio : 1.0 - ratio;
  if (factor == 0.0) {
    *this = LogScaled{};
    return *this;
  }
  const int s = big.sign_;
  const double lm = big.log_mag_ + (big.sign_ == small.sign_ ? std::log1p(ratio) : std::log(factor));
  sign_ = s;
  log_mag_ = lm;
  return *this;
}

LogScaled LogScaled::pow(double exponent) const {
  if (sign_ == 0) {
    if (exponent > 0) return LogScaled{};
    throw DomainError("LogScaled: zero to a non-positive power");
  }
  if (sign_ < 0) {
    const double r = std::round(exponent);
    if (r != exponent) throw DomainError("LogScaled: negative base with fractional exponent");
    const int s = (static_cast<long long>(r) % 2 == 0) ? 1 : -1;
    return from_log(s, log_mag_ * exponent);
  }
  return from_log(1, log_mag_ * exponent);
}

std::ostream& operator<<(std::ostream& os, const LogScaled& v) {
  return os << "(" << v.sign() << ", " << v.log_magnitude() << ")";
}

double relative_difference(const LogScaled& a, const LogScaled& b) {
  if (b.is_zero()) return a.is_zero() ? 0.0 : std::numeric_limits<double>::infinity();
  if (a.sign() != b.sign()) return a.is_zero() ? 1.0 : std::numeric_limits<double>::infinity();
  return std::fabs(std::expm1(a.log_magnitude() - b.log_magnitude()));
}

}  // namespace rmt
