#include <cmath>
#include <numbers>

#include "rmt/determinant.hpp"
#include "rmt/ensembles.hpp"
#include "rmt/errors.hpp"
#include "rmt/specfun.hpp"

namespace rmt::ensembles {

using specfun::log_gamma;

double wishart_marginal(int n, int s, double lambda) {
  if (n < 1) throw DomainError("wishart_marginal: n must be >= 1");
  if (s < 0) throw DomainError("wishart_marginal: s must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("wishart_marginal: lambda must be >= 0");
  const double bracket = specfun::laguerre(n - 1, s, lambda) * specfun::laguerre(n, s + 1, lambda) -
                         specfun::laguerre(n, s, lambda) * specfun::laguerre(n - 1, s + 1, lambda);
  double log_pre = log_gamma(n) - log_gamma(s + n) - lambda;
  if (s > 0) {
    if (lambda == 0.0) return 0.0;
    log_pre += s * std::log(lambda);
  }
  return std::exp(log_pre) * bracket;
}

double gaussian_wigner_marginal(int n, double lambda) {
  if (n < 1) throw DomainError("gaussian_wigner_marginal: n must be >= 1");
  const double hn = specfun::hermite(n, lambda);
  const double bracket = hn * hn - specfun::hermite(n - 1, lambda) * specfun::hermite(n + 1, lambda);
  const double log_pre =
      -lambda * lambda - n * std::numbers::ln2 - 0.5 * std::log(std::numbers::pi) - log_gamma(n + 1.0);
  return std::exp(log_pre) * bracket;
}

double correlated_wishart_marginal(int n, int n_B, std::span<const double> sigma, double lambda) {
  if (n < 1 || n_B < n) throw DomainError("correlated_wishart_marginal: need n >= 1 and n_B >= n");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("correlated_wishart_marginal: lambda must be >= 0");
  }
  check_sigma(sigma, n);
  const int s = n_B - n;
  if (s > 0 && lambda == 0.0) return 0.0;

  // Bordered matrix [[0, lambda^{k-1}], [e^{-lambda/sigma_j}, Gamma(k+s) sigma_j^{k+s}]].
  biortho::LogMatrix m(static_cast<std::size_t>(n + 1));
  for (int k = 1; k <= n; ++k) {
    if (k == 1) {
      m(0, k) = LogScaled::one();
    } else if (lambda > 0.0) {
      m(0, k) = LogScaled::from_log(1, (k - 1) * std::log(lambda));
    }
  }
  LogScaled denom = LogScaled::from_double(n);
  for (int j = 1; j <= n; ++j) {
    const double sj = sigma[j - 1];
    m(j, 0) = LogScaled::from_log(1, -lambda / sj);
    for (int k = 1; k <= n; ++k) m(j, k) = LogScaled::from_log(1, log_gamma(k + s) + (k + s) * std::log(sj));
    denom *= LogScaled::from_log(1, (s + 1) * std::log(sj) + log_gamma(j + s));
    for (int i = 1; i < j; ++i) denom *= LogScaled::from_double(sj - sigma[i - 1]);
  }
  LogScaled value = -biortho::stable_log_det(m) / denom;
  if (s > 0) value *= LogScaled::from_log(1, s * std::log(lambda));
  return value.to_double();
}

}  // namespace rmt::ensembles
