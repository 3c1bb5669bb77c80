#include "tgk/dense.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace tgk {

namespace {

Eigen::Map<const Eigen::MatrixXd> as_eigen(const DenseMatrix& M) {
  return {M.a.data(), M.nrows, M.ncols};
}

} // namespace

LeastSquaresResult dense_least_squares(const DenseMatrix& Hbar,
                                       const std::vector<double>& rhs) {
  if (rhs.size() != static_cast<std::size_t>(Hbar.nrows))
    throw std::invalid_argument("dense_least_squares: rhs length mismatch");
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), Hbar.nrows);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as_eigen(Hbar));
  LeastSquaresResult out;
  out.rank_deficient = qr.rank() < Hbar.ncols;
  Eigen::VectorXd x = qr.solve(b);
  out.x.assign(x.data(), x.data() + x.size());
  return out;
}

EigResult dense_eig(const DenseMatrix& M) {
  if (M.nrows != M.ncols) throw std::invalid_argument("dense_eig: not square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(as_eigen(M), /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_eig: QR iteration did not converge");
  const int k = M.nrows;
  EigResult out;
  out.values.resize(k);
  out.vectors.resize(std::size_t(k) * k);
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  for (int j = 0; j < k; ++j) {
    out.values[j] = vals[j];
    for (int i = 0; i < k; ++i) out.vectors[std::size_t(j) * k + i] = vecs(i, j);
  }
  return out;
}

struct DenseLu::Impl {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  int n = 0;
  bool singular = false;
};

DenseLu::DenseLu() = default;
DenseLu::DenseLu(DenseLu&&) noexcept = default;
DenseLu& DenseLu::operator=(DenseLu&&) noexcept = default;
DenseLu::~DenseLu() = default;

DenseLu::DenseLu(const DenseMatrix& A) : impl_(new Impl) {
  if (A.nrows != A.ncols) throw std::invalid_argument("DenseLu: not square");
  impl_->n = A.nrows;
  impl_->lu.compute(as_eigen(A));
  for (int i = 0; i < impl_->n; ++i)
    if (impl_->lu.matrixLU()(i, i) == 0.0) impl_->singular = true;
}

std::vector<double> DenseLu::solve(const std::vector<double>& b) const {
  if (!impl_) throw std::logic_error("DenseLu::solve: empty factorization");
  if (b.size() != static_cast<std::size_t>(impl_->n))
    throw std::invalid_argument("DenseLu::solve: length mismatch");
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), impl_->n);
  Eigen::VectorXd x = impl_->lu.solve(bv);
  return {x.data(), x.data() + x.size()};
}

bool DenseLu::singular() const { return impl_ && impl_->singular; }
int DenseLu::dim() const { return impl_ ? impl_->n : 0; }

std::vector<double> dense_solve(const DenseMatrix& A,
                                const std::vector<double>& b) {
  DenseLu lu(A);
  if (lu.singular()) throw std::runtime_error("dense_solve: singular matrix");
  return lu.solve(b);
}

} // namespace tgk
