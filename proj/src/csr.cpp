#include "tgk/csr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tgk {

void CsrMatrix::validate() const {
  if (nrows < 0 || ncols < 0) throw std::invalid_argument("csr: negative dims");
  if (row_ptr.size() != static_cast<std::size_t>(nrows) + 1)
    throw std::invalid_argument("csr: row_ptr length != nrows+1");
  if (row_ptr[0] != 0) throw std::invalid_argument("csr: row_ptr[0] != 0");
  for (index_t r = 0; r < nrows; ++r)
    if (row_ptr[r + 1] < row_ptr[r])
      throw std::invalid_argument("csr: row_ptr not nondecreasing");
  const index_t nz = row_ptr[nrows];
  if (col_idx.size() != static_cast<std::size_t>(nz) ||
      values.size() != static_cast<std::size_t>(nz))
    throw std::invalid_argument("csr: nnz arrays mismatch row_ptr[nrows]");
  for (index_t r = 0; r < nrows; ++r)
    for (index_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      if (col_idx[p] < 0 || col_idx[p] >= ncols)
        throw std::invalid_argument("csr: column index out of range");
      if (p > row_ptr[r] && col_idx[p] <= col_idx[p - 1])
        throw std::invalid_argument("csr: columns not strictly increasing in row");
      if (!std::isfinite(values[p]))
        throw std::invalid_argument("csr: non-finite value");
    }
}

CsrMatrix csr_from_triplets(index_t nrows, index_t ncols,
                            std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix A;
  A.nrows = nrows;
  A.ncols = ncols;
  A.row_ptr.assign(static_cast<std::size_t>(nrows) + 1, 0);
  A.col_idx.reserve(t.size());
  A.values.reserve(t.size());
  std::size_t i = 0;
  while (i < t.size()) {
    std::size_t j = i + 1;
    double sum = t[i].value;
    while (j < t.size() && t[j].row == t[i].row && t[j].col == t[i].col)
      sum += t[j++].value;
    if (t[i].row < 0 || t[i].row >= nrows || t[i].col < 0 || t[i].col >= ncols)
      throw std::invalid_argument("csr_from_triplets: entry out of range");
    A.col_idx.push_back(t[i].col);
    A.values.push_back(sum);
    A.row_ptr[static_cast<std::size_t>(t[i].row) + 1]++;
    i = j;
  }
  for (index_t r = 0; r < nrows; ++r) A.row_ptr[r + 1] += A.row_ptr[r];
  A.validate();
  return A;
}

void spmv(const CsrMatrix& A, const double* x, double* y) {
  kernels::spmv_csr(A.nrows, A.row_ptr.data(), A.col_idx.data(),
                    A.values.data(), x, y);
}

std::vector<double> spmv(const CsrMatrix& A, const std::vector<double>& x) {
  if (x.size() != static_cast<std::size_t>(A.ncols))
    throw std::invalid_argument("spmv: dimension mismatch");
  std::vector<double> y(static_cast<std::size_t>(A.nrows));
  spmv(A, x.data(), y.data());
  return y;
}

CsrMatrix transpose(const CsrMatrix& A) {
  CsrMatrix T;
  T.nrows = A.ncols;
  T.ncols = A.nrows;
  T.row_ptr.assign(static_cast<std::size_t>(T.nrows) + 1, 0);
  T.col_idx.resize(A.values.size());
  T.values.resize(A.values.size());
  for (index_t c : A.col_idx) T.row_ptr[static_cast<std::size_t>(c) + 1]++;
  for (index_t r = 0; r < T.nrows; ++r) T.row_ptr[r + 1] += T.row_ptr[r];
  std::vector<index_t> fill(T.row_ptr.begin(), T.row_ptr.end() - 1);
  for (index_t r = 0; r < A.nrows; ++r)
    for (index_t p = A.row_ptr[r]; p < A.row_ptr[r + 1]; ++p) {
      const index_t pos = fill[A.col_idx[p]]++;
      T.col_idx[pos] = r;
      T.values[pos] = A.values[p];
    }
  return T;
}

bool csr_equal(const CsrMatrix& a, const CsrMatrix& b) {
  return a.nrows == b.nrows && a.ncols == b.ncols && a.row_ptr == b.row_ptr &&
         a.col_idx == b.col_idx &&
         std::equal(a.values.begin(), a.values.end(), b.values.begin(),
                    b.values.end(),
                    [](double x, double y) { return x == y && std::signbit(x) == std::signbit(y); });
}

void write_matrix_market(std::ostream& os, const CsrMatrix& A) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.nrows << ' ' << A.ncols << ' ' << A.nnz() << '\n';
  char buf[64];
  for (index_t r = 0; r < A.nrows; ++r)
    for (index_t p = A.row_ptr[r]; p < A.row_ptr[r + 1]; ++p) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r + 1, A.col_idx[p] + 1,
                    A.values[p]);
      os << buf;
    }
}

void write_matrix_market(const std::string& path, const CsrMatrix& A) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_matrix_market(f, A);
  if (!f.good()) throw std::runtime_error("write failed: " + path);
}

CsrMatrix read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("matrix market: empty input");
  {
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" ||
        format != "coordinate" || field != "real")
      throw std::runtime_error("matrix market: unsupported header: " + line);
    if (symmetry != "general")
      throw std::runtime_error("matrix market: only 'general' symmetry supported");
  }
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  long long nrows = 0, ncols = 0, nnz = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nrows >> ncols >> nnz))
      throw std::runtime_error("matrix market: bad size line");
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (long long i = 0; i < nnz; ++i) {
    long long r, c;
    double v;
    if (!(is >> r >> c >> v))
      throw std::runtime_error("matrix market: truncated entry list");
    t.push_back({static_cast<index_t>(r - 1), static_cast<index_t>(c - 1), v});
  }
  return csr_from_triplets(static_cast<index_t>(nrows),
                           static_cast<index_t>(ncols), std::move(t));
}

CsrMatrix read_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_matrix_market(f);
}

} // namespace tgk
