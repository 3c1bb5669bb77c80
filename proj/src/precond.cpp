#include "tgk/precond.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgk {

Ilu0Factors ilu0_factor(const CsrMatrix& A, double shift) {
  if (A.nrows != A.ncols)
    throw std::invalid_argument("ilu0: matrix must be square");
  const index_t n = A.nrows;

  // Work on a copy of A's pattern/values with the shifted diagonal; rows are
  // eliminated in place (IKJ), restricted to existing positions (zero fill).
  std::vector<index_t> row_ptr = A.row_ptr;
  std::vector<index_t> col_idx = A.col_idx;
  std::vector<double> val = A.values;
  std::vector<index_t> diag_pos(n, -1);

  for (index_t r = 0; r < n; ++r)
    for (index_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      if (col_idx[p] == r) {
        diag_pos[r] = p;
        val[p] += shift;
      }
  for (index_t r = 0; r < n; ++r)
    if (diag_pos[r] < 0)
      throw std::runtime_error("ilu0: missing diagonal entry in row " +
                               std::to_string(r));

  // Scatter buffer: position of column c in the current row, or -1.
  std::vector<index_t> pos_of_col(n, -1);
  for (index_t i = 0; i < n; ++i) {
    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
      pos_of_col[col_idx[p]] = p;

    double row_max = 0;
    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
      row_max = std::max(row_max, std::abs(val[p]));

    for (index_t p = row_ptr[i]; p < row_ptr[i + 1] && col_idx[p] < i; ++p) {
      const index_t k = col_idx[p];
      const double pivot = val[diag_pos[k]];
      if (std::abs(pivot) < 1e-14 * row_max)
        throw std::runtime_error(
            "ilu0: near-zero pivot at row " + std::to_string(k) +
            "; increase the diagonal shift");
      const double lik = val[p] / pivot;
      val[p] = lik;
      for (index_t q = diag_pos[k] + 1; q < row_ptr[k + 1]; ++q) {
        const index_t pj = pos_of_col[col_idx[q]];
        if (pj >= 0) val[pj] -= lik * val[q];
      }
    }
    const double pivot_i = val[diag_pos[i]];
    if (std::abs(pivot_i) < 1e-14 * row_max)
      throw std::runtime_error(
          "ilu0: near-zero pivot at row " + std::to_string(i) +
          "; increase the diagonal shift");

    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
      pos_of_col[col_idx[p]] = -1;
  }

  // Split into strict-lower L (unit diagonal implicit) and upper U.
  Ilu0Factors F;
  F.shift = shift;
  F.L.nrows = F.L.ncols = n;
  F.U.nrows = F.U.ncols = n;
  F.L.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  F.U.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (index_t r = 0; r < n; ++r)
    for (index_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      (col_idx[p] < r ? F.L.row_ptr : F.U.row_ptr)[static_cast<std::size_t>(r) + 1]++;
  for (index_t r = 0; r < n; ++r) {
    F.L.row_ptr[r + 1] += F.L.row_ptr[r];
    F.U.row_ptr[r + 1] += F.U.row_ptr[r];
  }
  F.L.col_idx.resize(F.L.row_ptr[n]);
  F.L.values.resize(F.L.row_ptr[n]);
  F.U.col_idx.resize(F.U.row_ptr[n]);
  F.U.values.resize(F.U.row_ptr[n]);
  {
    std::vector<index_t> lf(F.L.row_ptr.begin(), F.L.row_ptr.end() - 1);
    std::vector<index_t> uf(F.U.row_ptr.begin(), F.U.row_ptr.end() - 1);
    for (index_t r = 0; r < n; ++r)
      for (index_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
        if (col_idx[p] < r) {
          F.L.col_idx[lf[r]] = col_idx[p];
          F.L.values[lf[r]++] = val[p];
        } else {
          F.U.col_idx[uf[r]] = col_idx[p];
          F.U.values[uf[r]++] = val[p];
        }
      }
  }
  return F;
}

void apply_prec(const Ilu0Factors& F, const double* v, double* w) {
  const index_t n = F.L.nrows;
  // Forward solve L y = v (unit diagonal), y stored in w.
  for (index_t r = 0; r < n; ++r) {
    double s = v[r];
    for (index_t p = F.L.row_ptr[r]; p < F.L.row_ptr[r + 1]; ++p)
      s -= F.L.values[p] * w[F.L.col_idx[p]];
    w[r] = s;
  }
  // Backward solve U w = y in place.
  for (index_t r = n - 1; r >= 0; --r) {
    double s = w[r];
    double d = 1.0;
    for (index_t p = F.U.row_ptr[r]; p < F.U.row_ptr[r + 1]; ++p) {
      if (F.U.col_idx[p] == r)
        d = F.U.values[p];
      else
        s -= F.U.values[p] * w[F.U.col_idx[p]];
    }
    w[r] = s / d;
  }
}

} // namespace tgk
