#ifndef VIDQUAL_TENSOR_HPP
#define VIDQUAL_TENSOR_HPP

#include <cstddef>
#include <vector>

#include "vidqual/common.hpp"

namespace vq {

// Row-major dense matrix of doubles. Double precision keeps the
// finite-difference gradient checks and 1e-9 oracle tolerances honest.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return v.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

}  // namespace vq

#endif  // VIDQUAL_TENSOR_HPP
