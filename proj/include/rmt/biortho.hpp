#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "rmt/determinant.hpp"
#include "rmt/log_scaled.hpp"
#include "rmt/quadrature.hpp"

namespace rmt::biortho {

/// Closed interval of the real line; either end may be infinite.
struct Support {
  double lo;
  double hi;

  bool contains(double x) const { return x >= lo && x <= hi; }
  /// Quadrature domain covering the interval. Half-lines must start or end at 0.
  specfun::QuadratureSpec quadrature(double relative_tolerance) const;
};

using WeightFn = std::function<LogScaled(double)>;
/// Evaluates f_1(x), ..., f_n(x) together.
using FamilyFn = std::function<std::vector<LogScaled>(double)>;
/// Closed-form moment h_{j,k}, 1-based indices.
using MomentFn = std::function<LogScaled(int, int)>;

struct ClosedFormMoments {
  MomentFn entry;
};
struct QuadratureMoments {};
using MomentStrategy = std::variant<ClosedFormMoments, QuadratureMoments>;

struct BuildOptions {
  int spot_checks = 3;          // closed-form entries re-derived by quadrature
  bool verify_all = false;      // check the whole closed-form table
  double verify_tolerance = 1e-6;
  double quadrature_tolerance = 1e-10;
  std::uint64_t verify_seed = 0x9e3779b97f4a7c15ULL;
  // Points where the weight or family is singular; marginal_density reports
  // the mean of the two one-sided values at +-singular_offset.
  std::vector<double> singular_points;
  double singular_offset = 1e-6;
};

/// Largest supported n + r for the bordered determinants.
inline constexpr int kMaxBorderedSize = 24;

/// Immutable biorthogonal ensemble
///   P(x) = C Delta_n(x) prod_l w(x_l) det[f_j(x_k)],  C^{-1} = n! det[h_{j,k}],
///   h_{j,k} = int w(x) f_j(x) x^{k-1} dx.
class BiorthoSystem {
 public:
  int n() const { return state_->n; }
  const Support& support() const { return state_->support; }
  LogScaled weight(double x) const { return state_->weight(x); }
  std::vector<LogScaled> family_row(double x) const { return state_->family(x); }
  LogScaled family(int j, double x) const;
  const LogMatrix& moment_matrix() const { return state_->moments; }
  /// The normalization constant C.
  LogScaled norm() const { return state_->norm; }
  const std::vector<double>& singular_points() const { return state_->options.singular_points; }
  double singular_offset() const { return state_->options.singular_offset; }
  const WeightFn& weight_fn() const { return state_->weight; }
  const FamilyFn& family_fn() const { return state_->family; }

 private:
  struct State {
    int n;
    Support support;
    WeightFn weight;
    FamilyFn family;
    LogMatrix moments;
    LogScaled norm;
    BuildOptions options;
  };
  std::shared_ptr<const State> state_;

  friend BiorthoSystem build_system(int, Support, WeightFn, FamilyFn, const MomentStrategy&, const BuildOptions&);
};

/// Assemble a system, computing or verifying the moment matrix.
///
/// Closed-form tables are spot-checked against quadrature at
/// `options.spot_checks` pseudo-random entries (all entries with
/// `verify_all`); a discrepancy above `verify_tolerance` throws
/// NumericalError. A vanishing det h throws SingularSystemError.
BiorthoSystem build_system(int n, Support support, WeightFn weight, FamilyFn family, const MomentStrategy& moments,
                           const BuildOptions& options = {});

/// h_{j,k} computed by quadrature of w f_j x^{k-1} over the support.
specfun::IntegrationResult quadrature_moment(int n, const Support& support, const WeightFn& weight,
                                             const FamilyFn& family, int j, int k, double relative_tolerance);

struct MomentCheck {
  int j = 0;
  int k = 0;
  LogScaled closed_form;
  LogScaled quadrature;
  double discrepancy = 0;  // relative to |closed form|, or to int |integrand| for zero entries
};

MomentCheck check_moment(const BiorthoSystem& sys, int j, int k, double relative_tolerance = 1e-10);

/// Joint density P(x_1..x_n).
LogScaled joint_density(const BiorthoSystem& sys, std::span<const double> x);

/// r-point correlation R_r(x_1..x_r) from the (n + r)-dimensional bordered
/// determinant [[0, x_j^{k-1}], [f_j(x_k), h_{j,k}]].
double correlation_r(const BiorthoSystem& sys, std::span<const double> x);

/// p(x) = R_1(x) / n.
double marginal_density(const BiorthoSystem& sys, double x);

}  // namespace rmt::biortho
