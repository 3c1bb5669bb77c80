// Portable reference kernels.  Multi-accumulator loops keep the reductions
// reasonably fast without any ISA-specific code; these are the semantics the
// SIMD variants are tested against.

#include "tgk/kernels.hpp"

#include <cmath>

namespace tgk::kernels::detail::scalar {

double dot(std::size_t n, const double* x, const double* y) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += x[i] * y[i];
    a1 += x[i + 1] * y[i + 1];
    a2 += x[i + 2] * y[i + 2];
    a3 += x[i + 3] * y[i + 3];
  }
  double s = (a0 + a1) + (a2 + a3);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double nrm2(std::size_t n, const double* x) { return std::sqrt(dot(n, x, x)); }

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby(std::size_t n, double a, const double* x, double b, const double* y,
           double* z) {
  for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

void scal(std::size_t n, double a, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void copy_scaled(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

double axpy_dot(std::size_t n, double a, const double* x, double* w,
                const double* z) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    double w0 = w[i] + a * x[i];
    double w1 = w[i + 1] + a * x[i + 1];
    double w2 = w[i + 2] + a * x[i + 2];
    double w3 = w[i + 3] + a * x[i + 3];
    w[i] = w0;
    w[i + 1] = w1;
    w[i + 2] = w2;
    w[i + 3] = w3;
    a0 += w0 * z[i];
    a1 += w1 * z[i + 1];
    a2 += w2 * z[i + 2];
    a3 += w3 * z[i + 3];
  }
  double s = (a0 + a1) + (a2 + a3);
  for (; i < n; ++i) {
    w[i] += a * x[i];
    s += w[i] * z[i];
  }
  return s;
}

void spmv_csr(index_t nrows, const index_t* row_ptr, const index_t* col_idx,
              const double* values, const double* x, double* y) {
  for (index_t r = 0; r < nrows; ++r) {
    double s = 0;
    for (index_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      s += values[p] * x[col_idx[p]];
    y[r] = s;
  }
}

// Row-chunked so the streamed block is touched once per call; chunk sized to
// keep the working panel inside L2.
static std::size_t chunk_rows(std::size_t cols_live) {
  std::size_t rows = (1u << 21) / (8 * (cols_live ? cols_live : 1));
  if (rows < 64) rows = 64;
  if (rows > 4096) rows = 4096;
  return rows;
}

void gemv_t(std::size_t n, std::size_t k, const double* V, const double* x,
            double* out) {
  for (std::size_t j = 0; j < k; ++j) out[j] = 0;
  const std::size_t L = chunk_rows(k + 1);
  for (std::size_t r0 = 0; r0 < n; r0 += L) {
    const std::size_t len = (r0 + L <= n) ? L : n - r0;
    for (std::size_t j = 0; j < k; ++j)
      out[j] += dot(len, V + j * n + r0, x + r0);
  }
}

void gemv_n(std::size_t n, std::size_t k, const double* V, const double* c,
            double* y) {
  const std::size_t L = chunk_rows(k + 1);
  for (std::size_t r0 = 0; r0 < n; r0 += L) {
    const std::size_t len = (r0 + L <= n) ? L : n - r0;
    for (std::size_t j = 0; j < k; ++j) axpy(len, c[j], V + j * n + r0, y + r0);
  }
}

void gemm_nn(std::size_t n, std::size_t m, std::size_t k, const double* V,
             const double* P, double* Y) {
  const std::size_t L = chunk_rows(m + k);
  for (std::size_t r0 = 0; r0 < n; r0 += L) {
    const std::size_t len = (r0 + L <= n) ? L : n - r0;
    for (std::size_t j = 0; j < k; ++j) {
      double* yj = Y + j * n + r0;
      for (std::size_t r = 0; r < len; ++r) yj[r] = 0;
      for (std::size_t t = 0; t < m; ++t)
        axpy(len, P[j * m + t], V + t * n + r0, yj);
    }
  }
}

void gemm_tn(std::size_t n, std::size_t m, std::size_t k, const double* V,
             const double* W, double* C) {
  const std::size_t L = chunk_rows(m + k);
  for (std::size_t r0 = 0; r0 < n; r0 += L) {
    const std::size_t len = (r0 + L <= n) ? L : n - r0;
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < m; ++i)
        C[j * m + i] += dot(len, V + i * n + r0, W + j * n + r0);
  }
}

} // namespace tgk::kernels::detail::scalar
