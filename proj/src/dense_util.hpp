#pragma once
// Internal small-dense helpers shared by the Arnoldi-based solvers: eigenvalue
// ordering that keeps conjugate partners adjacent, realification of complex
// eigenvector blocks, and uncounted dense orthonormalization for restart
// transforms.  Everything here is O(m^2)-O(m^3) on subspace-sized data.

#include "tgk/dense.hpp"

#include <complex>
#include <vector>

namespace tgk::detail {

// True when v[i] and v[i+1] are a conjugate pair (within rounding slack).
bool is_conj_pair(const std::vector<std::complex<double>>& v, int i);

// Index permutation ordering eigenvalues by ascending magnitude with
// deterministic tie-breaks.  Conjugate partners (adjacent in the raw output
// of the dense eigensolver) stay adjacent, +imag member first.
std::vector<int> sort_eigs_ascending(const std::vector<std::complex<double>>& v);

// Number of leading columns to retain so that no conjugate pair is split:
// k, or k+1 when the boundary lands inside a pair, shrunk to at most cap.
int select_keff(const std::vector<std::complex<double>>& ordered, int k,
                int cap);

// Realified eigenvector block: ordered complex columns (rows x k_eff) to a
// real rows x k_eff matrix, each conjugate pair contributing its (Re, Im).
DenseMatrix realify_columns(const std::vector<std::complex<double>>& ordered_vals,
                            const std::vector<std::complex<double>>& ordered_vecs,
                            int rows, int k_eff);

// In-place MGS orthonormalization (two passes) of an uncounted small dense
// block; columns collapsing below drop_tol * entry norm are removed and the
// rest compacted.  Returns the retained rank.
int orthonormalize_dense(int rows, int cols, double* A, double drop_tol = 1e-12);

// y = M x and y = M^T x on the leading rows x cols block.
void matvec(const DenseMatrix& M, int rows, int cols, const double* x,
            double* y);
void matvec_t(const DenseMatrix& M, int rows, int cols, const double* x,
              double* y);

} // namespace tgk::detail
