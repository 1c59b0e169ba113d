#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmt/biortho.hpp"
#include "rmt/log_scaled.hpp"

namespace rmt::ensembles {

enum class Kind { Quotient, WignerWishartSum, WignerWishartProduct, TwoWishartSum };

std::string_view to_string(Kind kind);
std::optional<Kind> parse_kind(std::string_view name);

/// Parameters of one composite model.
///
///   Quotient              H = (aA)(1 + bB)^{-1}, A, B Wishart with n_A, n_B dof
///   WignerWishartSum      H = aA + bB, A GUE, B Wishart with n_B dof
///   WignerWishartProduct  H = AB, A GUE, B Wishart with n_B dof
///   TwoWishartSum         H = aA + bB, A Wishart, B Wishart with covariance diag(sigma)
struct EnsembleSpec {
  Kind kind = Kind::Quotient;
  int n = 1;
  int n_A = 1;
  int n_B = 1;
  double a = 1.0;
  double b = 1.0;
  std::vector<double> sigma;

  /// Throws DomainError when the parameters do not define an analytic system.
  void validate() const;
  /// Weaker check used by the sampler: b = 0 (and a = 0 for the sums) allowed.
  void validate_for_sampling() const;
  /// m = n_A + n_B - n for TwoWishartSum.
  int m() const { return n_A + n_B - n; }
  bool uses_n_A() const { return kind == Kind::Quotient || kind == Kind::TwoWishartSum; }
  bool uses_weights() const { return kind != Kind::WignerWishartProduct; }
};

/// Family used for the quotient model. `Literal` evaluates the Tricomi
/// functions directly; `Conditioned` uses an equivalent basis of the same
/// span, built in extended precision, that stays well conditioned as b -> 0.
enum class QuotientFamily { Conditioned, Literal };

struct SystemOptions {
  biortho::BuildOptions build;
  QuotientFamily quotient_family = QuotientFamily::Conditioned;
};

biortho::BiorthoSystem quotient_system(const EnsembleSpec& spec, const SystemOptions& options = {});
biortho::BiorthoSystem wigner_wishart_sum_system(const EnsembleSpec& spec, const SystemOptions& options = {});
biortho::BiorthoSystem wigner_wishart_product_system(const EnsembleSpec& spec, const SystemOptions& options = {});
biortho::BiorthoSystem two_wishart_sum_system(const EnsembleSpec& spec, const SystemOptions& options = {});
/// Dispatch on spec.kind.
biortho::BiorthoSystem make_system(const EnsembleSpec& spec, const SystemOptions& options = {});

/// Support of the eigenvalues of the model.
biortho::Support support_of(Kind kind);

/// f_j of the Wigner+Wishart sum through the two-term 1F1 form. Intended as a
/// cross-check for |lambda/a - a/(2b)| <= 5.
LogScaled wigner_wishart_sum_family_kummer(int n_B, int j, double a, double b, double lambda);

/// Reference marginals.
double wishart_marginal(int n, int s, double lambda);
double gaussian_wigner_marginal(int n, double lambda);
double correlated_wishart_marginal(int n, int n_B, std::span<const double> sigma, double lambda);

/// Rejects sigma vectors with a pair closer than 1e-8 max(sigma).
void check_sigma(std::span<const double> sigma, int n);

}  // namespace rmt::ensembles
