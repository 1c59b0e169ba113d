#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rmt/ensembles.hpp"

namespace rmt::sampler {

using ComplexMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Deterministic random stream keyed by (seed, stream_index).
///
/// The engine state is derived with splitmix64 and driven through
/// mt19937_64; uniforms and normals are produced here rather than by the
/// standard distributions so sequences do not depend on the library.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  /// Uniform on (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Hermitian matrix with density proportional to exp(-tr A^2): diagonal
/// entries N(0, 1/2), real and imaginary parts of off-diagonal entries N(0, 1/4).
ComplexMatrix sample_gue(int n, RngStream& rng);

/// B = S^{1/2} G G^H S^{1/2}, G an n x dof matrix whose entries have real and
/// imaginary parts N(0, 1/2), S = diag(sigma) (identity when sigma is empty).
/// Density proportional to exp(-tr S^{-1} B) |B|^{dof - n}.
ComplexMatrix sample_wishart(int n, int dof, std::span<const double> sigma, RngStream& rng);

/// Ascending eigenvalues of a Hermitian matrix. Throws DomainError when the
/// input deviates from Hermitian by more than 1e-12 (relative to its largest entry).
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

/// Principal square root of a Hermitian positive definite matrix.
ComplexMatrix posdef_sqrt(const ComplexMatrix& m);

/// One draw of the sorted spectrum of the composite model.
std::vector<double> realize_eigenvalues(const ensembles::EnsembleSpec& spec, RngStream& rng);

}  // namespace rmt::sampler
