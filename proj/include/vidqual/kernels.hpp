#ifndef VIDQUAL_KERNELS_HPP
#define VIDQUAL_KERNELS_HPP

#include "vidqual/tensor.hpp"

// Numeric kernels backing the model math. Each hot kernel has an
// OpenMP-parallel version (the default) and a serial reference used by the
// tests and the benchmark. Parallelism is over output rows only, so results
// are bit-identical to the serial path for any thread count.
namespace vq::kernels {

// C = op(A) * op(B). transpose flags select op(X) = X or X^T.
void gemm(const Mat& a, bool trans_a, const Mat& b, bool trans_b, Mat& c);
void gemm_serial(const Mat& a, bool trans_a, const Mat& b, bool trans_b, Mat& c);

// y[r] += bias for every row r.
void add_row_bias(Mat& y, const Mat& bias);

// Exact (erf-based) GELU, elementwise.
void gelu(const Mat& x, Mat& y);
void gelu_serial(const Mat& x, Mat& y);
// dx = dy .* gelu'(x)
void gelu_backward(const Mat& x, const Mat& dy, Mat& dx);

// Row-wise softmax with max subtraction.
void softmax_rows(const Mat& x, Mat& y);
void softmax_rows_serial(const Mat& x, Mat& y);
// Per-row softmax Jacobian product: dx_i = y_i * (dy_i - sum_j dy_j y_j).
void softmax_rows_backward(const Mat& y, const Mat& dy, Mat& dx);

// y += x
void add_inplace(Mat& y, const Mat& x);
// y += alpha * x
void axpy(double alpha, const Mat& x, Mat& y);

int thread_count();

}  // namespace vq::kernels

#endif  // VIDQUAL_KERNELS_HPP
