#include "rmt/biortho.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "rmt/errors.hpp"
#include "rmt/specfun.hpp"

namespace rmt::biortho {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LogScaled power(double x, int k) {
  if (k == 0) return LogScaled::one();
  return LogScaled::from_double(x).pow(k);
}

LogScaled log_factorial(int n) { return LogScaled::from_log(1, specfun::log_gamma(n + 1.0)); }

void require_in_support(const Support& s, double x, const char* op) {
  if (!std::isfinite(x) || !s.contains(x)) {
    std::ostringstream msg;
    msg << op << ": point " << x << " outside support [" << s.lo << ", " << s.hi << "]";
    throw SupportError(msg.str());
  }
}

// det of [[0_{r x r}, x_j^{k-1}], [f_j(x_k), h_{j,k}]].
LogScaled bordered_det(const BiorthoSystem& sys, std::span<const double> x) {
  const int n = sys.n();
  const int r = static_cast<int>(x.size());
  LogMatrix m(static_cast<std::size_t>(n + r));
  for (int j = 0; j < r; ++j) {
    for (int k = 0; k < n; ++k) m(j, r + k) = power(x[j], k);
  }
  for (int k = 0; k < r; ++k) {
    const auto row = sys.family_row(x[k]);
    for (int j = 0; j < n; ++j) m(r + j, k) = row[j];
  }
  const LogMatrix& h = sys.moment_matrix();
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) m(r + j, r + k) = h(j, k);
  }
  return stable_log_det(m);
}

double shift_off_singular(const BiorthoSystem& sys, double x) {
  for (double s : sys.singular_points()) {
    if (x == s) return x + sys.singular_offset();
  }
  return x;
}

}  // namespace

specfun::QuadratureSpec Support::quadrature(double relative_tolerance) const {
  using specfun::QuadratureSpec;
  if (lo == -kInf && hi == kInf) return QuadratureSpec::full_line(relative_tolerance);
  if (lo == 0.0 && hi == kInf) return QuadratureSpec::half_line_positive(relative_tolerance);
  if (lo == -kInf && hi == 0.0) return QuadratureSpec::half_line_negative(relative_tolerance);
  if (std::isfinite(lo) && std::isfinite(hi)) return QuadratureSpec::bounded(lo, hi, relative_tolerance);
  throw DomainError("Support: half-lines must start or end at the origin");
}

LogScaled BiorthoSystem::family(int j, double x) const {
  if (j < 1 || j > n()) throw DomainError("BiorthoSystem::family: index out of range");
  return family_row(x)[static_cast<std::size_t>(j - 1)];
}

specfun::IntegrationResult quadrature_moment(int n, const Support& support, const WeightFn& weight,
                                             const FamilyFn& family, int j, int k, double relative_tolerance) {
  if (j < 1 || j > n || k < 1 || k > n) throw DomainError("quadrature_moment: index out of range");
  auto integrand = [&](double x) {
    return weight(x) * family(x)[static_cast<std::size_t>(j - 1)] * power(x, k - 1);
  };
  return specfun::integrate_detailed(integrand, support.quadrature(relative_tolerance));
}

namespace {

double moment_discrepancy(const LogScaled& closed, const specfun::IntegrationResult& quad) {
  const LogScaled diff = closed - quad.value;
  if (diff.is_zero()) return 0.0;
  const LogScaled scale = closed.is_zero() ? quad.absolute : closed;
  if (scale.is_zero()) return std::numeric_limits<double>::infinity();
  return std::exp(diff.log_magnitude() - scale.log_magnitude());
}

}  // namespace

MomentCheck check_moment(const BiorthoSystem& sys, int j, int k, double relative_tolerance) {
  const auto quad = quadrature_moment(sys.n(), sys.support(), sys.weight_fn(), sys.family_fn(), j, k,
                                      relative_tolerance);
  MomentCheck out;
  out.j = j;
  out.k = k;
  out.closed_form = sys.moment_matrix()(j - 1, k - 1);
  out.quadrature = quad.value;
  out.discrepancy = moment_discrepancy(out.closed_form, quad);
  return out;
}

BiorthoSystem build_system(int n, Support support, WeightFn weight, FamilyFn family, const MomentStrategy& moments,
                           const BuildOptions& options) {
  if (n < 1) throw DomainError("build_system: n must be >= 1");
  if (n + 1 > kMaxBorderedSize) {
    throw DomainError("build_system: n = " + std::to_string(n) + " exceeds the supported size");
  }
  if (!(support.lo < support.hi)) throw DomainError("build_system: empty support");

  auto state = std::make_shared<BiorthoSystem::State>();
  state->n = n;
  state->support = support;
  state->weight = std::move(weight);
  state->family = std::move(family);
  state->options = options;
  state->moments = LogMatrix(static_cast<std::size_t>(n));

  if (const auto* closed = std::get_if<ClosedFormMoments>(&moments)) {
    for (int j = 1; j <= n; ++j) {
      for (int k = 1; k <= n; ++k) {
        const LogScaled v = closed->entry(j, k);
        if (!std::isfinite(v.log_magnitude()) && !v.is_zero()) {
          throw NumericalError("build_system: non-finite moment entry");
        }
        state->moments(j - 1, k - 1) = v;
      }
    }
    std::vector<std::pair<int, int>> entries;
    if (options.verify_all) {
      for (int j = 1; j <= n; ++j)
        for (int k = 1; k <= n; ++k) entries.emplace_back(j, k);
    } else {
      std::mt19937_64 rng(options.verify_seed);
      std::uniform_int_distribution<int> pick(1, n);
      std::set<std::pair<int, int>> chosen;
      const int wanted = std::min(options.spot_checks, n * n);
      while (static_cast<int>(chosen.size()) < wanted) chosen.emplace(pick(rng), pick(rng));
      entries.assign(chosen.begin(), chosen.end());
    }
    for (auto [j, k] : entries) {
      const auto quad = quadrature_moment(n, state->support, state->weight, state->family, j, k,
                                          options.quadrature_tolerance);
      const double d = moment_discrepancy(state->moments(j - 1, k - 1), quad);
      if (!(d <= options.verify_tolerance)) {
        std::ostringstream msg;
        msg << "build_system: closed-form h(" << j << "," << k << ") disagrees with quadrature (relative "
            << d << ")";
        throw NumericalError(msg.str());
      }
    }
  } else {
    for (int j = 1; j <= n; ++j) {
      for (int k = 1; k <= n; ++k) {
        state->moments(j - 1, k - 1) =
            quadrature_moment(n, state->support, state->weight, state->family, j, k, options.quadrature_tolerance)
                .value;
      }
    }
  }

  const LogScaled det = stable_log_det(state->moments);
  if (det.is_zero()) throw SingularSystemError("build_system: moment matrix is singular");
  // C = 1 / (n! det h)
  state->norm = LogScaled::one() / (log_factorial(n) * det);

  BiorthoSystem sys;
  sys.state_ = std::move(state);
  return sys;
}

LogScaled joint_density(const BiorthoSystem& sys, std::span<const double> x) {
  const int n = sys.n();
  if (static_cast<int>(x.size()) != n) throw DomainError("joint_density: expected n points");
  for (double v : x) require_in_support(sys.support(), v, "joint_density");

  LogScaled vandermonde = LogScaled::one();
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) vandermonde *= LogScaled::from_double(x[j] - x[k]);
  }
  if (vandermonde.is_zero()) return LogScaled::zero();

  LogMatrix f(static_cast<std::size_t>(n));
  LogScaled weights = LogScaled::one();
  for (int k = 0; k < n; ++k) {
    weights *= sys.weight(x[k]);
    const auto row = sys.family_row(x[k]);
    for (int j = 0; j < n; ++j) f(j, k) = row[j];
  }
  return sys.norm() * vandermonde * weights * stable_log_det(f);
}

double correlation_r(const BiorthoSystem& sys, std::span<const double> x) {
  const int n = sys.n();
  const int r = static_cast<int>(x.size());
  if (r < 1 || r > n) throw DomainError("correlation_r: r must lie in 1..n");
  if (n + r > kMaxBorderedSize) throw DomainError("correlation_r: n + r exceeds the supported size");
  std::vector<double> pts(x.begin(), x.end());
  for (double& v : pts) {
    require_in_support(sys.support(), v, "correlation_r");
    v = shift_off_singular(sys, v);
  }
  LogScaled value = log_factorial(n) * sys.norm() * bordered_det(sys, pts);
  for (double v : pts) value *= sys.weight(v);
  if (r % 2 == 1) value = -value;
  return value.to_double();
}

double marginal_density(const BiorthoSystem& sys, double x) {
  require_in_support(sys.support(), x, "marginal_density");
  for (double s : sys.singular_points()) {
    if (x == s) {
      const double below = x - sys.singular_offset();
      const double above = x + sys.singular_offset();
      const bool has_below = sys.support().contains(below);
      const bool has_above = sys.support().contains(above);
      if (has_below && has_above) return 0.5 * (marginal_density(sys, below) + marginal_density(sys, above));
      return marginal_density(sys, has_above ? above : below);
    }
  }
  const int n = sys.n();
  const double pt[] = {x};
  // p(x) = -(n-1)! C w(x) det[[0, x^{k-1}], [f_j(x), h_{j,k}]]
  LogScaled value = -(log_factorial(n - 1) * sys.norm() * sys.weight(x) * bordered_det(sys, pt));
  return value.to_double();
}

}  // namespace rmt::biortho
