#pragma once

#include <cstddef>
#include <vector>

#include "rmt/log_scaled.hpp"

namespace rmt::biortho {

/// Dense square matrix of log-scaled entries, row-major.
class LogMatrix {
 public:
  LogMatrix() = default;
  explicit LogMatrix(std::size_t n) : n_(n), data_(n * n) {}

  std::size_t size() const { return n_; }
  LogScaled& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const LogScaled& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<LogScaled> data_;
};

/// Determinant of a log-scaled matrix.
///
/// Three alternating sweeps shift rows and columns by integers towards zero
/// mean log magnitude (over their nonzero entries). LU with partial pivoting
/// then runs in long double on the shifted entries when they span less than
/// e^{+-5000}, and on log-scaled entries otherwise. The shifts are added back
/// in the log. A singular matrix yields the zero value.
LogScaled stable_log_det(const LogMatrix& m);

}  // namespace rmt::biortho
