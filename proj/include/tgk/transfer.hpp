#pragma once
// Coarse-to-fine grid transfer (tensor-product not-a-knot cubic splines, or
// bilinear as a cheaper switch) and the Rayleigh-Ritz assessment of
// transferred eigenvector blocks on the fine grid.

#include "tgk/counter.hpp"
#include "tgk/dense.hpp"
#include "tgk/problems.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace tgk {

enum class TransferMethod { spline, bilinear };

TransferMethod transfer_from_string(const std::string& s);

struct TransferOperator {
  Grid2D coarse;
  Grid2D fine;
  TransferMethod method = TransferMethod::spline;
};

// One-shot convenience (builds internal workspace per call).
std::vector<double> prolongate(const TransferOperator& T,
                               const std::vector<double>& v_coarse);

// Reusable form: factors the 1-D interpolation systems once, then applies
// them to many vectors (solution + a whole eigenvector block).
class Prolongator {
 public:
  explicit Prolongator(const TransferOperator& T);
  ~Prolongator();
  Prolongator(Prolongator&&) noexcept;

  // Interpolates the coarse grid function (zero-padded on the boundary) and
  // samples it at fine interior points.  Counts 2 vops on the target counter
  // when one is supplied (two sweeps over fine-grid-sized data).
  std::vector<double> apply(const std::vector<double>& v_coarse,
                            const VecOps* vo = nullptr) const;

  const TransferOperator& op() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RayleighRitzResult {
  int k = 0;                  // retained block size (after any rank drop)
  std::vector<double> Q;      // n x k orthonormal
  std::vector<double> AQ;     // n x k, A*Q (exactly k operator applies)
  DenseMatrix H;              // k x k projected matrix Q^T A Q
  std::vector<std::complex<double>> values;  // Ritz values, ascending |theta|
  std::vector<std::complex<double>> vectors; // k x k eigenvector matrix G
                                             // (Ritz vectors are Q*G columns)
  std::vector<double> resnorms; // ||A q - theta q||/||q|| per Ritz pair
};

// Orthonormalizes V (dropping dependent columns), forms AQ with exactly k
// operator applies, projects, solves the small eigenproblem, and reports
// residual norms computed from cached blocks (no further operator applies).
RayleighRitzResult rayleigh_ritz(InstrumentedOperator& op,
                                 const std::vector<double>& V, int k,
                                 const VecOps& vo);

// Materializes Ritz vectors as a real n x k block: real eigenvectors give one
// column, conjugate pairs give adjacent real/imaginary-part columns.
std::vector<double> ritz_vectors_real(const RayleighRitzResult& rr,
                                      std::size_t n, const VecOps& vo);

} // namespace tgk
