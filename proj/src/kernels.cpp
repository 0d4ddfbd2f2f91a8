#include "vidqual/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vq::kernels {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

inline void gemm_dims(const Mat& a, bool ta, const Mat& b, bool tb, int& n,
                      int& k, int& m) {
  n = ta ? a.cols : a.rows;
  k = ta ? a.rows : a.cols;
  const int kb = tb ? b.cols : b.rows;
  m = tb ? b.rows : b.cols;
  require(k == kb, "gemm: inner dimensions do not match");
}

inline double gemm_cell(const Mat& a, bool ta, const Mat& b, bool tb, int k,
                        int i, int j) {
  double acc = 0.0;
  if (!ta && !tb) {
    const double* ar = a.row(i);
    for (int p = 0; p < k; ++p) acc += ar[p] * b.at(p, j);
  } else if (!ta && tb) {
    const double* ar = a.row(i);
    const double* br = b.row(j);
    for (int p = 0; p < k; ++p) acc += ar[p] * br[p];
  } else if (ta && !tb) {
    for (int p = 0; p < k; ++p) acc += a.at(p, i) * b.at(p, j);
  } else {
    for (int p = 0; p < k; ++p) acc += a.at(p, i) * b.at(j, p);
  }
  return acc;
}

}  // namespace

void gemm_serial(const Mat& a, bool ta, const Mat& b, bool tb, Mat& c) {
  int n, k, m;
  gemm_dims(a, ta, b, tb, n, k, m);
  c = Mat(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) c.at(i, j) = gemm_cell(a, ta, b, tb, k, i, j);
}

void gemm(const Mat& a, bool ta, const Mat& b, bool tb, Mat& c) {
  int n, k, m;
  gemm_dims(a, ta, b, tb, n, k, m);
  c = Mat(n, m);
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m * k > 16384)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) c.at(i, j) = gemm_cell(a, ta, b, tb, k, i, j);
}

void add_row_bias(Mat& y, const Mat& bias) {
  require(bias.rows == 1 && bias.cols == y.cols, "add_row_bias: shape mismatch");
  for (int i = 0; i < y.rows; ++i) {
    double* r = y.row(i);
    for (int j = 0; j < y.cols; ++j) r[j] += bias.v[j];
  }
}

void gelu_serial(const Mat& x, Mat& y) {
  y = Mat(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i) {
    const double v = x.v[i];
    y.v[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
}

void gelu(const Mat& x, Mat& y) {
  y = Mat(x.rows, x.cols);
  const long n = static_cast<long>(x.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (long i = 0; i < n; ++i) {
    const double v = x.v[i];
    y.v[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
}

void gelu_backward(const Mat& x, const Mat& dy, Mat& dx) {
  require(x.same_shape(dy), "gelu_backward: shape mismatch");
  dx = Mat(x.rows, x.cols);
  const long n = static_cast<long>(x.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (long i = 0; i < n; ++i) {
    const double v = x.v[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
    dx.v[i] = dy.v[i] * (cdf + v * pdf);
  }
}

namespace {
inline void softmax_row(const double* x, double* y, int n) {
  double mx = x[0];
  for (int j = 1; j < n; ++j) mx = std::max(mx, x[j]);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    y[j] = std::exp(x[j] - mx);
    sum += y[j];
  }
  const double inv = 1.0 / sum;
  for (int j = 0; j < n; ++j) y[j] *= inv;
}
}  // namespace

void softmax_rows_serial(const Mat& x, Mat& y) {
  y = Mat(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i) softmax_row(x.row(i), y.row(i), x.cols);
}

void softmax_rows(const Mat& x, Mat& y) {
  y = Mat(x.rows, x.cols);
#pragma omp parallel for schedule(static) if (static_cast<long>(x.rows) * x.cols > 4096)
  for (int i = 0; i < x.rows; ++i) softmax_row(x.row(i), y.row(i), x.cols);
}

void softmax_rows_backward(const Mat& y, const Mat& dy, Mat& dx) {
  require(y.same_shape(dy), "softmax_rows_backward: shape mismatch");
  dx = Mat(y.rows, y.cols);
#pragma omp parallel for schedule(static) if (static_cast<long>(y.rows) * y.cols > 4096)
  for (int i = 0; i < y.rows; ++i) {
    const double* yr = y.row(i);
    const double* dyr = dy.row(i);
    double dot = 0.0;
    for (int j = 0; j < y.cols; ++j) dot += yr[j] * dyr[j];
    double* dxr = dx.row(i);
    for (int j = 0; j < y.cols; ++j) dxr[j] = yr[j] * (dyr[j] - dot);
  }
}

void add_inplace(Mat& y, const Mat& x) {
  require(y.same_shape(x), "add_inplace: shape mismatch");
  for (size_t i = 0; i < y.size(); ++i) y.v[i] += x.v[i];
}

void axpy(double alpha, const Mat& x, Mat& y) {
  require(y.same_shape(x), "axpy: shape mismatch");
  for (size_t i = 0; i < y.size(); ++i) y.v[i] += alpha * x.v[i];
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace vq::kernels
