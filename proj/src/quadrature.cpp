#include "rmt/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "rmt/errors.hpp"

namespace rmt::specfun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Drop below the maximum (in log units) beyond which an integrand region is
// treated as negligible; e^-45 ~ 3e-20.
constexpr double kCutoff = 45.0;

// Kronrod 21-point abscissae (positive half) and weights; the 10-point Gauss
// rule uses the odd-indexed abscissae.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525089722, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

// One mapped piece of the integration range: s ranges over [lo_limit, hi_limit]
// and log_g(s) already contains the Jacobian.
struct Piece {
  std::function<LogScaled(double)> log_g;
  double scan_lo;
  double scan_hi;
  double lo_limit;
  double hi_limit;
};

struct Panel {
  double a;
  double b;
  double result;
  double abs_result;
  double error;
};

struct PanelOrder {
  bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

class PieceIntegrator {
 public:
  PieceIntegrator(const Piece& piece, const QuadratureSpec& spec) : piece_(piece), spec_(spec) {}

  struct Outcome {
    double value = 0;  // scaled by exp(-scale)
    double abs_value = 0;
    double error = 0;
    double scale = -kInf;
    int subdivisions = 0;
    int evaluations = 0;
  };

  Outcome run() {
    Outcome out;
    if (!locate()) return out;
    std::vector<double> breaks = initial_breaks();

    std::priority_queue<Panel, std::vector<Panel>, PanelOrder> queue;
    std::vector<Panel> frozen;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) queue.push(kronrod(breaks[i], breaks[i + 1]));

    int subdivisions = 0;
    while (true) {
      if (rescale_pending_) {
        rescale(queue, frozen);
        continue;
      }
      double total = 0, total_abs = 0, total_err = 0;
      sum(queue, frozen, total, total_abs, total_err);
      const double target = std::max(spec_.relative_tolerance * std::fabs(total), 50 * kEps * total_abs);
      if (total_err <= target || queue.empty()) {
        if (total_err > target) {
          throw ConvergenceError("integrate: panels cannot be refined further; error estimate " +
                                 std::to_string(total_err / std::max(std::fabs(total), 1e-300)));
        }
        out.value = total;
        out.abs_value = total_abs;
        out.error = total_err;
        break;
      }
      if (subdivisions >= spec_.max_subdivisions) {
        throw ConvergenceError("integrate: subdivision cap " + std::to_string(spec_.max_subdivisions) +
                               " reached; relative error estimate " +
                               std::to_string(total_err / std::max(std::fabs(total), 1e-300)));
      }
      Panel worst = queue.top();
      queue.pop();
      const double mid = 0.5 * (worst.a + worst.b);
      if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-13 * (1.0 + std::fabs(mid))) {
        frozen.push_back(worst);
        continue;
      }
      queue.push(kronrod(worst.a, mid));
      queue.push(kronrod(mid, worst.b));
      ++subdivisions;
    }
    out.scale = scale_;
    out.subdivisions = subdivisions;
    out.evaluations = evaluations_;
    return out;
  }

 private:
  double eval_log(double s, int* sign = nullptr) {
    ++evaluations_;
    const LogScaled v = piece_.log_g(s);
    if (sign) *sign = v.sign();
    if (v.sign() != 0 && !std::isfinite(v.log_magnitude())) {
      throw NumericalError("integrand returned a non-finite value");
    }
    return v.log_magnitude();
  }

  // Evaluate the scaled integrand exp(log g - scale) with sign.
  double eval_scaled(double s) {
    int sign = 0;
    const double lg = eval_log(s, &sign);
    if (sign == 0) return 0.0;
    if (lg - scale_ > 30.0) {
      pending_scale_ = std::max(pending_scale_, lg);
      rescale_pending_ = true;
    }
    return sign * std::exp(lg - scale_);
  }

  Panel kronrod(double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = eval_scaled(center);
    double resk = fc * kWgk[10];
    double resg = 0.0;
    double resabs = std::fabs(resk);
    std::array<double, 10> f1{}, f2{};
    for (int j = 0; j < 10; ++j) {
      const double dx = half * kXgk[j];
      f1[j] = eval_scaled(center - dx);
      f2[j] = eval_scaled(center + dx);
      const double pair = f1[j] + f2[j];
      resk += kWgk[j] * pair;
      resabs += kWgk[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
      if (j % 2 == 1) resg += kWg[j / 2] * pair;
    }
    const double mean = resk * 0.5;
    double resasc = kWgk[10] * std::fabs(fc - mean);
    for (int j = 0; j < 10; ++j) resasc += kWgk[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));
    const double result = resk * half;
    resabs *= std::fabs(half);
    resasc *= std::fabs(half);
    double err = std::fabs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50 * kEps)) err = std::max(50 * kEps * resabs, err);
    return Panel{a, b, result, resabs, err};
  }

  static void sum(const std::priority_queue<Panel, std::vector<Panel>, PanelOrder>& q,
                  const std::vector<Panel>& frozen, double& total, double& total_abs, double& total_err) {
    auto copy = q;
    while (!copy.empty()) {
      const Panel& p = copy.top();
      total += p.result;
      total_abs += p.abs_result;
      total_err += p.error;
      copy.pop();
    }
    for (const Panel& p : frozen) {
      total += p.result;
      total_abs += p.abs_result;
      total_err += p.error;
    }
  }

  void rescale(std::priority_queue<Panel, std::vector<Panel>, PanelOrder>& q, std::vector<Panel>& frozen) {
    // A panel found a value far above the scanned maximum; re-express every
    // stored panel relative to the new maximum and recompute the stale ones.
    const double new_scale = pending_scale_;
    const double factor = std::exp(scale_ - new_scale);
    std::vector<Panel> panels;
    while (!q.empty()) {
      panels.push_back(q.top());
      q.pop();
    }
    scale_ = new_scale;
    rescale_pending_ = false;
    for (Panel& p : panels) q.push(kronrod(p.a, p.b));
    for (Panel& p : frozen) {
      p.result *= factor;
      p.abs_result *= factor;
      p.error *= factor;
    }
  }

  // Scan the mapped integrand, find its maximum and the bracket where it is
  // within kCutoff of the maximum. Returns false for an identically-zero integrand.
  bool locate() {
    constexpr double step = 0.25;
    std::vector<double> s, lg;
    for (double x = piece_.scan_lo; x <= piece_.scan_hi + 1e-12; x += step) {
      s.push_back(x);
      lg.push_back(eval_log(x));
    }
    auto current_max = [&] { return *std::max_element(lg.begin(), lg.end()); };

    double h = step;
    while (s.back() < piece_.hi_limit && (lg.back() > current_max() - kCutoff || lg.back() == current_max())) {
      const double x = std::min(s.back() + h, piece_.hi_limit);
      s.push_back(x);
      lg.push_back(eval_log(x));
      h *= 1.1;
    }
    h = step;
    while (s.front() > piece_.lo_limit && (lg.front() > current_max() - kCutoff || lg.front() == current_max())) {
      const double x = std::max(s.front() - h, piece_.lo_limit);
      s.insert(s.begin(), x);
      lg.insert(lg.begin(), eval_log(x));
      h *= 1.1;
    }

    const auto imax = static_cast<std::size_t>(std::max_element(lg.begin(), lg.end()) - lg.begin());
    double best = lg[imax];
    if (best == -kInf) return false;
    peak_ = s[imax];

    // Golden-section refinement of the maximum inside the neighbouring cells.
    double a = s[imax == 0 ? 0 : imax - 1];
    double b = s[std::min(imax + 1, s.size() - 1)];
    if (b > a) {
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = b - g * (b - a), x2 = a + g * (b - a);
      double f1 = eval_log(x1), f2 = eval_log(x2);
      for (int it = 0; it < 60 && (b - a) > 1e-12 * (1.0 + std::fabs(a)); ++it) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + g * (b - a);
          f2 = eval_log(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - g * (b - a);
          f1 = eval_log(x1);
        }
      }
      const double xm = 0.5 * (a + b);
      const double fm = eval_log(xm);
      if (fm > best) {
        best = fm;
        peak_ = xm;
      }
    }
    scale_ = best;
    const double threshold = best - kCutoff;
    if (lg[imax] < best) {
      // The refined peak lies between scan points; keep it in the bracket search.
      const auto pos = std::upper_bound(s.begin(), s.end(), peak_) - s.begin();
      s.insert(s.begin() + pos, peak_);
      lg.insert(lg.begin() + pos, best);
    }

    std::size_t il = 0;
    while (lg[il] < threshold) ++il;
    std::size_t ir = lg.size() - 1;
    while (lg[ir] < threshold) --ir;
    core_lo_ = il == 0 ? s[0] : crossing(s[il - 1], s[il], threshold);
    core_hi_ = ir + 1 == lg.size() ? s.back() : crossing(s[ir + 1], s[ir], threshold);
    core_lo_ = std::min(core_lo_, peak_);
    core_hi_ = std::max(core_hi_, peak_);
    if (core_hi_ <= core_lo_) {
      core_lo_ = peak_ - step;
      core_hi_ = peak_ + step;
    }
    return true;
  }

  // Bisect for the point between `outside` (below threshold) and `inside`.
  double crossing(double outside, double inside, double threshold) {
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (outside + inside);
      if (eval_log(mid) >= threshold) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return outside;
  }

  std::vector<double> initial_breaks() const {
    std::vector<double> breaks;
    auto add_segment = [&](double a, double b) {
      if (b <= a) return;
      const int parts = std::clamp(static_cast<int>(std::ceil((b - a) / 1.0)), 1, 48);
      for (int i = 0; i < parts; ++i) breaks.push_back(a + (b - a) * i / parts);
    };
    add_segment(core_lo_, peak_);
    add_segment(peak_, core_hi_);
    breaks.push_back(core_hi_);
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    if (breaks.size() < 2) breaks = {core_lo_, core_hi_};
    return breaks;
  }

  const Piece& piece_;
  const QuadratureSpec& spec_;
  double scale_ = -kInf;
  double pending_scale_ = -kInf;
  bool rescale_pending_ = false;
  double peak_ = 0;
  double core_lo_ = 0;
  double core_hi_ = 0;
  int evaluations_ = 0;
};

Piece half_line_piece(const LogIntegrand& f, bool positive) {
  Piece p;
  p.log_g = [&f, positive](double s) -> LogScaled {
    const double t = std::exp(s);
    if (t == 0.0 || !std::isfinite(t)) return LogScaled::zero();
    LogScaled v = f(positive ? t : -t);
    return v * LogScaled::from_log(1, s);
  };
  p.scan_lo = -40.0;
  p.scan_hi = 12.0;
  p.lo_limit = -700.0;
  p.hi_limit = 700.0;
  return p;
}

Piece bounded_piece(const LogIntegrand& f, double lo, double hi) {
  Piece p;
  const double width = hi - lo;
  const double log_width = std::log(width);
  p.log_g = [&f, lo, hi, width, log_width](double s) -> LogScaled {
    const double e = std::exp(-2.0 * std::fabs(s));
    const double offset = width * e / (1.0 + e);
    const double t = s >= 0 ? hi - offset : lo + offset;
    if (!(t > lo && t < hi)) return LogScaled::zero();
    const double log_jac = log_width + std::log(2.0) - 2.0 * std::fabs(s) - 2.0 * std::log1p(e);
    return f(t) * LogScaled::from_log(1, log_jac);
  };
  p.scan_lo = -20.0;
  p.scan_hi = 20.0;
  p.lo_limit = -30.0;
  p.hi_limit = 30.0;
  return p;
}

}  // namespace

QuadratureSpec QuadratureSpec::half_line_positive(double rtol) {
  return QuadratureSpec{Domain::HalfLinePositive, 0.0, 0.0, rtol, 2000};
}
QuadratureSpec QuadratureSpec::half_line_negative(double rtol) {
  return QuadratureSpec{Domain::HalfLineNegative, 0.0, 0.0, rtol, 2000};
}
QuadratureSpec QuadratureSpec::full_line(double rtol) {
  return QuadratureSpec{Domain::FullLine, 0.0, 0.0, rtol, 2000};
}
QuadratureSpec QuadratureSpec::bounded(double lo, double hi, double rtol) {
  return QuadratureSpec{Domain::Bounded, lo, hi, rtol, 2000};
}

void QuadratureSpec::validate() const {
  if (!(relative_tolerance > 0.0 && relative_tolerance < 1.0)) {
    throw DomainError("QuadratureSpec: relative_tolerance must lie in (0, 1)");
  }
  if (max_subdivisions < 1) throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
  if (domain == Domain::Bounded && !(lo < hi && std::isfinite(lo) && std::isfinite(hi))) {
    throw DomainError("QuadratureSpec: bounded domain needs finite lo < hi");
  }
}

IntegrationResult integrate_detailed(const LogIntegrand& f, const QuadratureSpec& spec) {
  spec.validate();
  std::vector<Piece> pieces;
  switch (spec.domain) {
    case Domain::HalfLinePositive:
      pieces.push_back(half_line_piece(f, true));
      break;
    case Domain::HalfLineNegative:
      pieces.push_back(half_line_piece(f, false));
      break;
    case Domain::FullLine:
      pieces.push_back(half_line_piece(f, false));
      pieces.push_back(half_line_piece(f, true));
      break;
    case Domain::Bounded:
      pieces.push_back(bounded_piece(f, spec.lo, spec.hi));
      break;
  }

  IntegrationResult result;
  LogScaled abs_error;
  for (const Piece& piece : pieces) {
    PieceIntegrator integrator(piece, spec);
    const auto out = integrator.run();
    result.subdivisions += out.subdivisions;
    result.evaluations += out.evaluations;
    if (out.scale == -kInf) continue;
    const LogScaled scale = LogScaled::from_log(1, out.scale);
    result.value += LogScaled::from_double(out.value) * scale;
    result.absolute += LogScaled::from_double(out.abs_value) * scale;
    abs_error += LogScaled::from_double(out.error) * scale;
  }
  if (!result.value.is_zero()) {
    result.relative_error = (abs_error / result.value).to_double();
    result.relative_error = std::fabs(result.relative_error);
  }
  return result;
}

LogScaled integrate(const LogIntegrand& f, const QuadratureSpec& spec) {
  return integrate_detailed(f, spec).value;
}

double integrate_real(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  return integrate([&f](double t) { return LogScaled::from_double(f(t)); }, spec).to_double();
}

}  // namespace rmt::specfun
