#pragma once
// Operation accounting: OpCounter totals, counted wrappers over the vector
// kernels (VecOps), and InstrumentedOperator — the matrix (+ optional right
// preconditioner) handle every solver iterates with.
//
// Counting conventions (these feed the cost model directly):
//   * one length-n dot / axpy / scale / scaled-copy / norm  -> vops += 1
//   * the fused Gram-Schmidt step (axpy_dot)                -> vops += 2
//   * block products count their column passes: V^T x or y += V c over k
//     columns -> vops += k; an n x m by m x k product -> vops += m*k
//   * operator apply -> mvp += 1 (plus prec += 1 when preconditioned)
//   * audit applies (consistency recomputations that the algorithm would not
//     need in exact arithmetic) -> audit_mvp, excluded from the cost model

#include "tgk/csr.hpp"
#include "tgk/kernels.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tgk {

struct Ilu0Factors; // precond.hpp

struct OpCounter {
  std::uint64_t mvp = 0;       // matrix-vector products
  std::uint64_t prec = 0;      // preconditioner applications
  std::uint64_t vops = 0;      // length-n vector operations
  std::uint64_t audit_mvp = 0; // instrumentation-only products

  void reset() { *this = OpCounter{}; }
};

// Counted vector operations.  Thin: every call forwards to kernels:: and bumps
// the counter per the conventions above.
class VecOps {
 public:
  explicit VecOps(OpCounter* c) : c_(c) {}

  double dot(std::size_t n, const double* x, const double* y) const {
    c_->vops += 1;
    return kernels::dot(n, x, y);
  }
  double nrm2(std::size_t n, const double* x) const {
    c_->vops += 1;
    return kernels::nrm2(n, x);
  }
  void axpy(std::size_t n, double a, const double* x, double* y) const {
    c_->vops += 1;
    kernels::axpy(n, a, x, y);
  }
  void axpby(std::size_t n, double a, const double* x, double b,
             const double* y, double* z) const {
    c_->vops += 1;
    kernels::axpby(n, a, x, b, y, z);
  }
  void scal(std::size_t n, double a, double* x) const {
    c_->vops += 1;
    kernels::scal(n, a, x);
  }
  void copy_scaled(std::size_t n, double a, const double* x, double* y) const {
    c_->vops += 1;
    kernels::copy_scaled(n, a, x, y);
  }
  double axpy_dot(std::size_t n, double a, const double* x, double* w,
                  const double* z) const {
    c_->vops += 2;
    return kernels::axpy_dot(n, a, x, w, z);
  }
  void gemv_t(std::size_t n, std::size_t k, const double* V, const double* x,
              double* out) const {
    c_->vops += k;
    kernels::gemv_t(n, k, V, x, out);
  }
  void gemv_n(std::size_t n, std::size_t k, const double* V, const double* cf,
              double* y) const {
    c_->vops += k;
    kernels::gemv_n(n, k, V, cf, y);
  }
  void gemm_nn(std::size_t n, std::size_t m, std::size_t k, const double* V,
               const double* P, double* Y) const {
    c_->vops += m * k;
    kernels::gemm_nn(n, m, k, V, P, Y);
  }
  void gemm_tn(std::size_t n, std::size_t m, std::size_t k, const double* V,
               const double* W, double* C) const {
    c_->vops += m * k;
    kernels::gemm_tn(n, m, k, V, W, C);
  }

  OpCounter* counter() const { return c_; }

 private:
  OpCounter* c_;
};

// Matrix plus optional right preconditioner plus shared counter.  apply()
// computes y = A M^{-1} x (just y = A x when unpreconditioned): solvers always
// see the composite operator, so residuals stay residuals of the original
// system when drivers run the standard right-preconditioned split
//   solve (A M^{-1}) z = r0 from z = 0, then x = x0 + M^{-1} z.
struct InstrumentedOperator {
  const CsrMatrix* A = nullptr;
  const Ilu0Factors* M = nullptr; // optional
  OpCounter* counter = nullptr;

  InstrumentedOperator(const CsrMatrix& a, OpCounter& c)
      : A(&a), counter(&c) {}
  InstrumentedOperator(const CsrMatrix& a, const Ilu0Factors* m, OpCounter& c)
      : A(&a), M(m), counter(&c) {}

  std::size_t n() const { return static_cast<std::size_t>(A->nrows); }

  // y = A M^{-1} x; counts mvp (and prec when preconditioned)
  void apply(const double* x, double* y);
  // same arithmetic, counts audit_mvp only (instrumentation recomputations)
  void apply_audit(const double* x, double* y);
  // w = M^{-1} v (identity copy when unpreconditioned); counts prec
  void apply_minv(const double* v, double* w);

 private:
  void apply_impl(const double* x, double* y);
  std::vector<double> work_;
};

} // namespace tgk
