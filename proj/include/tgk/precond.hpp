#pragma once
// ILU(0): incomplete LU factorization with zero fill, with an optional
// diagonal shift applied inside the factorization only (the operator itself
// is never modified).  Applied as a right preconditioner by the drivers.

#include "tgk/csr.hpp"

namespace tgk {

struct Ilu0Factors {
  CsrMatrix L;  // unit lower triangular, sparsity of strict-lower(A); unit
                // diagonal implicit (not stored)
  CsrMatrix U;  // upper triangular including diagonal, sparsity of upper(A)
  double shift = 0.0;
};

// Standard row-wise (IKJ) ILU(0) on A + shift*I.  Throws std::runtime_error
// naming the row and suggesting a larger shift when a pivot falls below
// 1e-14 times the row's max magnitude.
Ilu0Factors ilu0_factor(const CsrMatrix& A, double shift);

// w = U^{-1} (L^{-1} v): one forward and one backward triangular solve.
// Uncounted here; InstrumentedOperator bumps counter.prec around it.
void apply_prec(const Ilu0Factors& F, const double* v, double* w);

} // namespace tgk
