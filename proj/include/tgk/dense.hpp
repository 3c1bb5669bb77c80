#pragma once
// Small dense matrices (projected systems: H, Hbar, Galerkin blocks) and the
// dense factorizations the solvers need.  Dimensions here are O(m) <= ~400,
// never O(n); none of this work counts toward vops.

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace tgk {

struct DenseMatrix {
  int nrows = 0;
  int ncols = 0;
  std::vector<double> a; // column-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : nrows(r), ncols(c), a(std::size_t(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[std::size_t(j) * nrows + i]; }
  double operator()(int i, int j) const { return a[std::size_t(j) * nrows + i]; }
};

struct LeastSquaresResult {
  std::vector<double> x;
  bool rank_deficient = false; // best-effort solution still returned
};

// argmin ||rhs - Hbar x||_2 via a rank-revealing orthogonal factorization.
LeastSquaresResult dense_least_squares(const DenseMatrix& Hbar,
                                       const std::vector<double>& rhs);

struct EigResult {
  std::vector<std::complex<double>> values;  // k entries
  std::vector<std::complex<double>> vectors; // k x k column-major
};

// Eigen-decomposition of a real general matrix (real Schur + shifted QR).
// Conjugate pairs come out adjacent.  Throws on iteration failure.
EigResult dense_eig(const DenseMatrix& M);

// Square solve A x = b (partial-pivot LU).  Throws on exact singularity.
std::vector<double> dense_solve(const DenseMatrix& A,
                                const std::vector<double>& b);

// LU factorization handle for repeated small solves (Galerkin H_g, etc.).
class DenseLu {
 public:
  DenseLu();
  explicit DenseLu(const DenseMatrix& A);
  DenseLu(DenseLu&&) noexcept;
  DenseLu& operator=(DenseLu&&) noexcept;
  ~DenseLu();

  std::vector<double> solve(const std::vector<double>& b) const;
  bool singular() const;
  int dim() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace tgk
