#pragma once
// Compressed sparse row matrix: the only large-matrix representation in the
// library, plus Matrix Market coordinate-format import/export.

#include "tgk/kernels.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tgk {

using kernels::index_t;

struct CsrMatrix {
  index_t nrows = 0;
  index_t ncols = 0;
  std::vector<index_t> row_ptr; // length nrows+1, nondecreasing, row_ptr[0]=0
  std::vector<index_t> col_idx; // strictly increasing within each row
  std::vector<double> values;   // finite

  index_t nnz() const { return row_ptr.empty() ? 0 : row_ptr[nrows]; }

  // Throws std::invalid_argument if any structural invariant is violated.
  void validate() const;
};

struct Triplet {
  index_t row;
  index_t col;
  double value;
};

// Sorts by (row, col) and sums duplicates; exact-zero sums are kept.
CsrMatrix csr_from_triplets(index_t nrows, index_t ncols,
                            std::vector<Triplet> triplets);

// y = A x  (uncounted; solvers go through InstrumentedOperator instead)
void spmv(const CsrMatrix& A, const double* x, double* y);
std::vector<double> spmv(const CsrMatrix& A, const std::vector<double>& x);

CsrMatrix transpose(const CsrMatrix& A);

// Structural and bitwise-value equality (canonical CSR assumed on both sides).
bool csr_equal(const CsrMatrix& a, const CsrMatrix& b);

// Matrix Market coordinate format, "matrix coordinate real general".
// Values are written with 17 significant digits, so write/read round-trips
// reproduce every double bit-exactly.
void write_matrix_market(std::ostream& os, const CsrMatrix& A);
void write_matrix_market(const std::string& path, const CsrMatrix& A);
CsrMatrix read_matrix_market(std::istream& is);
CsrMatrix read_matrix_market(const std::string& path);

} // namespace tgk
