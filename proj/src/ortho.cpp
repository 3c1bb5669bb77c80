#include "tgk/ortho.hpp"

#include <cmath>
#include <cstring>

namespace tgk {

namespace {

// One MGS sweep of w against V(:,0..k), coefficients added into h.  Uses the
// fused update-then-dot kernel so w crosses memory once per column.
double mgs_sweep(std::size_t n, const double* V, int k, double* w, double* h,
                 const VecOps& vo) {
  double hj = vo.dot(n, V, w); // against column 0
  for (int i = 1; i < k; ++i) {
    if (h) h[i - 1] += hj;
    hj = vo.axpy_dot(n, -hj, V + std::size_t(i - 1) * n, w,
                     V + std::size_t(i) * n);
  }
  if (h) h[k - 1] += hj;
  const double nrm2sq =
      vo.axpy_dot(n, -hj, V + std::size_t(k - 1) * n, w, w);
  return std::sqrt(std::max(nrm2sq, 0.0));
}

} // namespace

double mgs_orthogonalize(std::size_t n, const double* V, int k, double* w,
                         double* h, const VecOps& vo) {
  if (k <= 0) return vo.nrm2(n, w);
  const double pre = vo.nrm2(n, w);
  double nrm = mgs_sweep(n, V, k, w, h, vo);
  if (nrm < pre * 0.70710678118654752 && nrm > 0.0)
    nrm = mgs_sweep(n, V, k, w, h, vo);
  return nrm;
}

int orthonormalize_block(std::size_t n, int k, double* V, const VecOps& vo,
                         double drop_tol) {
  int kept = 0;
  for (int j = 0; j < k; ++j) {
    double* src = V + std::size_t(j) * n;
    double* dst = V + std::size_t(kept) * n;
    if (dst != src) std::memcpy(dst, src, n * sizeof(double));
    const double entry_norm = vo.nrm2(n, dst);
    if (entry_norm == 0.0) continue;
    double nrm = entry_norm;
    if (kept > 0) nrm = mgs_orthogonalize(n, V, kept, dst, nullptr, vo);
    if (nrm <= drop_tol * entry_norm) continue; // dependent: drop
    vo.scal(n, 1.0 / nrm, dst);
    ++kept;
  }
  return kept;
}

} // namespace tgk
