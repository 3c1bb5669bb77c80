#pragma once
// Low-level numerical kernels with runtime ISA dispatch.
//
// Every entry point forwards through a function-pointer table that is filled
// in once, on first use: an AVX2+FMA implementation when the CPU supports it,
// otherwise a portable scalar implementation.  The two variants are
// equivalence-tested against each other; force_isa() exists so tests (and
// the TGK_ISA environment variable) can pin a specific backend.
//
// These functions do raw arithmetic only.  Operation *counting* (the vops
// bookkeeping used by the cost model) lives one layer up, in counter.hpp.

#include <cstddef>
#include <cstdint>

namespace tgk::kernels {

using index_t = std::int32_t;

// ---- level-1 vector kernels ------------------------------------------------
double dot(std::size_t n, const double* x, const double* y);
double nrm2(std::size_t n, const double* x);
// y += a*x
void axpy(std::size_t n, double a, const double* x, double* y);
// z = a*x + b*y   (z may alias x or y)
void axpby(std::size_t n, double a, const double* x, double b, const double* y,
           double* z);
// x *= a
void scal(std::size_t n, double a, double* x);
// y = a*x
void copy_scaled(std::size_t n, double a, const double* x, double* y);
// Fused Gram-Schmidt step: w += a*x, then return dot(w, z) of the updated w.
// z == w is allowed (yields ||w||^2 after the update).  One memory pass.
double axpy_dot(std::size_t n, double a, const double* x, double* w,
                const double* z);

// ---- sparse matrix-vector product (CSR) -------------------------------------
void spmv_csr(index_t nrows, const index_t* row_ptr, const index_t* col_idx,
              const double* values, const double* x, double* y);

// ---- tall-skinny dense blocks (column-major, leading dimension n) -----------
// All are row-tiled so the n x k block streams from memory once.
//
// out[j] = dot(V(:,j), x) for j < k            (V^T x)
void gemv_t(std::size_t n, std::size_t k, const double* V, const double* x,
            double* out);
// y += V * c                                    (accumulate combination)
void gemv_n(std::size_t n, std::size_t k, const double* V, const double* c,
            double* y);
// Y = V * P   (V: n x m, P: m x k column-major, Y: n x k; Y distinct from V)
void gemm_nn(std::size_t n, std::size_t m, std::size_t k, const double* V,
             const double* P, double* Y);
// C += V^T * W (V: n x m, W: n x k, C: m x k column-major, caller zeroes C)
void gemm_tn(std::size_t n, std::size_t m, std::size_t k, const double* V,
             const double* W, double* C);

// ---- dispatch control --------------------------------------------------------
// Name of the backend currently in use: "avx2" or "scalar".
const char* active_isa();
// Pin a backend by name; returns false (and changes nothing) if unavailable.
// Also honored at first use via the TGK_ISA environment variable.
bool force_isa(const char* name);

} // namespace tgk::kernels
