// AVX2+FMA kernel variants.  This translation unit is compiled with
// -mavx2 -mfma and is only ever *called* after a runtime CPU check, so the
// rest of the library stays baseline-ISA clean.
//
// Reductions use four independent accumulators; results differ from the
// scalar reference only by floating-point reassociation (equivalence tests
// allow ~1e-13 relative).

#include "tgk/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace tgk::kernels::detail::avx2 {

static inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
    a2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), a2);
    a3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), a3);
  }
  for (; i + 4 <= n; i += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double nrm2(std::size_t n, const double* x) { return std::sqrt(dot(n, x, x)); }

void axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4),
                                                _mm256_loadu_pd(y + i + 4)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpby(std::size_t n, double a, const double* x, double b, const double* y,
           double* z) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(z + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

void scal(std::size_t n, double a, double* x) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void copy_scaled(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

double axpy_dot(std::size_t n, double a, const double* x, double* w,
                const double* z) {
  const __m256d va = _mm256_set1_pd(a);
  __m256d a0 = _mm256_setzero_pd(), a1 = a0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d w0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i));
    __m256d w1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(w + i + 4));
    _mm256_storeu_pd(w + i, w0);
    _mm256_storeu_pd(w + i + 4, w1);
    a0 = _mm256_fmadd_pd(w0, _mm256_loadu_pd(z + i), a0);
    a1 = _mm256_fmadd_pd(w1, _mm256_loadu_pd(z + i + 4), a1);
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) {
    w[i] += a * x[i];
    s += w[i] * z[i];
  }
  return s;
}

void spmv_csr(index_t nrows, const index_t* row_ptr, const index_t* col_idx,
              const double* values, const double* x, double* y) {
  for (index_t r = 0; r < nrows; ++r) {
    index_t p = row_ptr[r];
    const index_t end = row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; p + 4 <= end; p += 4) {
      __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col_idx + p));
      __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(values + p), xv, acc);
    }
    double s = hsum(acc);
    for (; p < end; ++p) s += values[p] * x[col_idx[p]];
    y[r] = s;
  }
}

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

// 4-row x 4-column register microkernel over the full inner dimension; the
// row chunk keeps the streamed V panel inside L2 so V and Y each cross the
// memory bus once per call.
void gemm_nn(std::size_t n, std::size_t m, std::size_t k, const double* V,
             const double* P, double* Y) {
  const std::size_t L = chunk_rows(m + k);
  for (std::size_t r0 = 0; r0 < n; r0 += L) {
    const std::size_t len = (r0 + L <= n) ? L : n - r0;
    std::size_t j = 0;
    for (; j + 4 <= k; j += 4) {
      const double *p0 = P + j * m, *p1 = P + (j + 1) * m, *p2 = P + (j + 2) * m,
                   *p3 = P + (j + 3) * m;
      double *y0 = Y + j * n + r0, *y1 = Y + (j + 1) * n + r0,
             *y2 = Y + (j + 2) * n + r0, *y3 = Y + (j + 3) * n + r0;
      std::size_t r = 0;
      for (; r + 4 <= len; r += 4) {
        __m256d c0 = _mm256_setzero_pd(), c1 = c0, c2 = c0, c3 = c0;
        for (std::size_t t = 0; t < m; ++t) {
          __m256d v = _mm256_loadu_pd(V + t * n + r0 + r);
          c0 = _mm256_fmadd_pd(v, _mm256_set1_pd(p0[t]), c0);
          c1 = _mm256_fmadd_pd(v, _mm256_set1_pd(p1[t]), c1);
          c2 = _mm256_fmadd_pd(v, _mm256_set1_pd(p2[t]), c2);
          c3 = _mm256_fmadd_pd(v, _mm256_set1_pd(p3[t]), c3);
        }
        _mm256_storeu_pd(y0 + r, c0);
        _mm256_storeu_pd(y1 + r, c1);
        _mm256_storeu_pd(y2 + r, c2);
        _mm256_storeu_pd(y3 + r, c3);
      }
      for (; r < len; ++r) {
        double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        for (std::size_t t = 0; t < m; ++t) {
          const double v = V[t * n + r0 + r];
          s0 += v * p0[t];
          s1 += v * p1[t];
          s2 += v * p2[t];
          s3 += v * p3[t];
        }
        y0[r] = s0;
        y1[r] = s1;
        y2[r] = s2;
        y3[r] = s3;
      }
    }
    for (; j < k; ++j) {
      double* yj = Y + j * n + r0;
      const double* pj = P + j * m;
      for (std::size_t r = 0; r < len; ++r) yj[r] = 0;
      for (std::size_t t = 0; t < m; ++t) axpy(len, pj[t], V + t * n + r0, yj);
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

} // namespace tgk::kernels::detail::avx2

#endif // __AVX2__ && __FMA__
