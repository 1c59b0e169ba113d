#include "rmt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmt/errors.hpp"

namespace rmt::sampler {

namespace {

using Dense = Eigen::MatrixXcd;
using ensembles::Kind;

constexpr double kInvSqrt2 = 0.70710678118654752440;

Dense hermitian_part(const ComplexMatrix& m) {
  Dense d = m;
  return (d + d.adjoint()) * 0.5;
}

void check_square(const ComplexMatrix& m, const char* op) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DomainError(std::string(op) + ": expected a non-empty square matrix");
  if (!m.allFinite()) throw DomainError(std::string(op) + ": non-finite entries");
}

void check_hermitian(const ComplexMatrix& m, const char* op) {
  check_square(m, op);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-12 * scale) throw DomainError(std::string(op) + ": matrix is not Hermitian");
}

Eigen::SelfAdjointEigenSolver<Dense> eigensolve(const Dense& h, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Dense> solver(h, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return solver;
}

std::vector<double> spectrum(const Dense& h) {
  const auto solver = eigensolve(h, false);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> draw_once(const ensembles::EnsembleSpec& spec, RngStream& rng) {
  const int n = spec.n;
  switch (spec.kind) {
    case Kind::Quotient: {
      const ComplexMatrix A = sample_wishart(n, spec.n_A, {}, rng);
      const ComplexMatrix B = sample_wishart(n, spec.n_B, {}, rng);
      // (1 + bB)^{-1/2} (aA) (1 + bB)^{-1/2}
      const auto eb = eigensolve(hermitian_part(B), true);
      Eigen::VectorXd d = eb.eigenvalues();
      for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = 1.0 / std::sqrt(1.0 + spec.b * std::max(d[i], 0.0));
      const Dense v = eb.eigenvectors();
      const Dense m = v * d.cast<std::complex<double>>().asDiagonal() * v.adjoint();
      const Dense h = spec.a * (m * Dense(A) * m);
      return spectrum((h + h.adjoint()) * 0.5);
    }
    case Kind::WignerWishartSum: {
      const ComplexMatrix A = sample_gue(n, rng);
      const ComplexMatrix B = sample_wishart(n, spec.n_B, {}, rng);
      const Dense h = spec.a * Dense(A) + spec.b * Dense(B);
      return spectrum((h + h.adjoint()) * 0.5);
    }
    case Kind::WignerWishartProduct: {
      const ComplexMatrix A = sample_gue(n, rng);
      const ComplexMatrix B = sample_wishart(n, spec.n_B, {}, rng);
      const Dense r = posdef_sqrt(B);
      const Dense h = r * Dense(A) * r;
      return spectrum((h + h.adjoint()) * 0.5);
    }
    case Kind::TwoWishartSum: {
      const ComplexMatrix A = sample_wishart(n, spec.n_A, {}, rng);
      const ComplexMatrix B = sample_wishart(n, spec.n_B, spec.sigma, rng);
      const Dense h = spec.a * Dense(A) + spec.b * Dense(B);
      return spectrum((h + h.adjoint()) * 0.5);
    }
  }
  throw DomainError("realize_eigenvalues: unknown kind");
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed), stream_index_(stream_index), engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream_index))) {}

double RngStream::uniform() {
  while (true) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double x, y, r2;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    r2 = x * x + y * y;
  } while (r2 >= 1.0 || r2 == 0.0);
  const double f = std::sqrt(-2.0 * std::log(r2) / r2);
  spare_ = y * f;
  has_spare_ = true;
  return x * f;
}

ComplexMatrix sample_gue(int n, RngStream& rng) {
  if (n < 1) throw DomainError("sample_gue: n must be >= 1");
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = {kInvSqrt2 * rng.normal(), 0.0};
    for (int j = i + 1; j < n; ++j) {
      const double re = 0.5 * rng.normal();
      const double im = 0.5 * rng.normal();
      a(i, j) = {re, im};
      a(j, i) = {re, -im};
    }
  }
  return a;
}

ComplexMatrix sample_wishart(int n, int dof, std::span<const double> sigma, RngStream& rng) {
  if (n < 1) throw DomainError("sample_wishart: n must be >= 1");
  if (dof < n) throw DomainError("sample_wishart: dof must be >= n");
  if (!sigma.empty() && static_cast<int>(sigma.size()) != n) throw DomainError("sample_wishart: sigma size must be n");
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("sample_wishart: sigma entries must be positive");
  }
  Dense g(n, dof);
  for (int i = 0; i < n; ++i) {
    const double scale = sigma.empty() ? kInvSqrt2 : kInvSqrt2 * std::sqrt(sigma[i]);
    for (int k = 0; k < dof; ++k) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, k) = {scale * re, scale * im};
    }
  }
  const Dense b = g * g.adjoint();
  return (b + b.adjoint()) * 0.5;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
  check_hermitian(m, "hermitian_eigenvalues");
  return spectrum(hermitian_part(m));
}

ComplexMatrix posdef_sqrt(const ComplexMatrix& m) {
  check_hermitian(m, "posdef_sqrt");
  const auto solver = eigensolve(hermitian_part(m), true);
  Eigen::VectorXd d = solver.eigenvalues();
  if (d.minCoeff() <= 0.0) throw DomainError("posdef_sqrt: matrix is not positive definite");
  d = d.cwiseSqrt();
  const Dense v = solver.eigenvectors();
  const Dense r = v * d.cast<std::complex<double>>().asDiagonal() * v.adjoint();
  return (r + r.adjoint()) * 0.5;
}

std::vector<double> realize_eigenvalues(const ensembles::EnsembleSpec& spec, RngStream& rng) {
  spec.validate_for_sampling();
  try {
    return draw_once(spec, rng);
  } catch (const NumericalError&) {
    return draw_once(spec, rng);
  }
}

}  // namespace rmt::sampler
