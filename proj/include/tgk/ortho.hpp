#pragma once
// Modified Gram-Schmidt with a one-shot DGKS-style reorthogonalization pass,
// shared by the Arnoldi factorizations, block orthonormalization, and basis
// construction.  Columns are contiguous length-n vectors (column-major,
// leading dimension n).

#include "tgk/counter.hpp"

#include <cstddef>

namespace tgk {

// Orthogonalizes w against columns V(:,0..k); accumulates coefficients into
// h[0..k) when h is non-null (h must be zero-initialized by the caller if the
// accumulated values are wanted fresh).  Returns the 2-norm of the resulting
// w (w is NOT normalized here).  A second full pass runs when the norm drops
// below 1/sqrt(2) of the entry norm, guarding basis orthogonality.
double mgs_orthogonalize(std::size_t n, const double* V, int k, double* w,
                         double* h, const VecOps& vo);

// In-place MGS orthonormalization of the k columns of V; columns whose norm
// collapses below drop_tol times their entry norm are removed.  Returns the
// retained column count (columns are compacted left).
int orthonormalize_block(std::size_t n, int k, double* V, const VecOps& vo,
                         double drop_tol = 1e-12);

} // namespace tgk
