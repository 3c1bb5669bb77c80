#include "tgk/transfer.hpp"

#include "tgk/ortho.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tgk {

TransferMethod transfer_from_string(const std::string& s) {
  if (s == "spline") return TransferMethod::spline;
  if (s == "bilinear") return TransferMethod::bilinear;
  throw std::invalid_argument("unknown transfer method: " + s);
}

// ---------------------------------------------------------------------------
// Prolongation
// ---------------------------------------------------------------------------
//
// The coarse grid function is extended by zero boundary values at x,y in
// {0,1}, interpolated per axis (tensor product), and sampled at fine interior
// points.  Spline flavor: not-a-knot cubic through the M = N_coarse+2 nodes
// of each grid line; the M x M moment system is factored once and reused for
// every line of every transferred vector.

struct Prolongator::Impl {
  TransferOperator T;
  int M = 0;       // nodes per line incl. boundary
  double hc = 0;
  DenseLu moment_lu; // spline moment system (empty for bilinear)
  struct CubicEval {
    int seg;                  // segment index in [0, M-2]
    double wA, wB, wCA, wCB;  // value and curvature weights
  };
  std::vector<CubicEval> cubic; // per fine interior index
  std::vector<int> lin_seg;     // bilinear: node index
  std::vector<double> lin_u;    // bilinear: offset in [0,1)

  // Interpolates one grid line: nodal values y[0..M) -> values at fine
  // points, written to out[0], out[stride], ...
  void spline_line(const std::vector<double>& y, std::vector<double>& rhs,
                   double* out, std::size_t stride) const {
    rhs[0] = 0;
    rhs[M - 1] = 0;
    const double c = 6.0 / (hc * hc);
    for (int i = 1; i < M - 1; ++i)
      rhs[i] = c * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
    const std::vector<double> s = moment_lu.solve(rhs);
    const int Nf = T.fine.N;
    for (int i = 0; i < Nf; ++i) {
      const auto& e = cubic[i];
      out[std::size_t(i) * stride] = e.wA * y[e.seg] + e.wB * y[e.seg + 1] +
                                     e.wCA * s[e.seg] + e.wCB * s[e.seg + 1];
    }
  }

  void linear_line(const std::vector<double>& y, double* out,
                   std::size_t stride) const {
    const int Nf = T.fine.N;
    for (int i = 0; i < Nf; ++i) {
      const int s = lin_seg[i];
      const double u = lin_u[i];
      out[std::size_t(i) * stride] = (1.0 - u) * y[s] + u * y[s + 1];
    }
  }
};

Prolongator::Prolongator(const TransferOperator& T) : impl_(new Impl) {
  Impl& im = *impl_;
  im.T = T;
  im.M = T.coarse.N + 2;
  im.hc = T.coarse.h;
  const int Nf = T.fine.N;

  if (T.method == TransferMethod::spline) {
    if (im.M < 4)
      throw std::invalid_argument(
          "spline prolongation needs at least 2 interior coarse points");
    // Moment system for nodal second derivatives s_0..s_{M-1}:
    //   interior rows:  s_{i-1} + 4 s_i + s_{i+1} = 6 (y_{i+1}-2y_i+y_{i-1})/hc^2
    //   end rows (not-a-knot, third derivative continuous at t_1, t_{M-2}):
    //   s_0 - 2 s_1 + s_2 = 0,  s_{M-3} - 2 s_{M-2} + s_{M-1} = 0
    DenseMatrix S(im.M, im.M);
    S(0, 0) = 1;
    S(0, 1) = -2;
    S(0, 2) = 1;
    for (int i = 1; i < im.M - 1; ++i) {
      S(i, i - 1) = 1;
      S(i, i) = 4;
      S(i, i + 1) = 1;
    }
    S(im.M - 1, im.M - 3) = 1;
    S(im.M - 1, im.M - 2) = -2;
    S(im.M - 1, im.M - 1) = 1;
    im.moment_lu = DenseLu(S);

    im.cubic.resize(Nf);
    for (int i = 0; i < Nf; ++i) {
      const double xf = (i + 1) * T.fine.h;
      int seg = std::min(int(xf / im.hc), im.M - 2);
      const double A = ((seg + 1) * im.hc - xf) / im.hc;
      const double B = (xf - seg * im.hc) / im.hc;
      const double c = im.hc * im.hc / 6.0;
      im.cubic[i] = {seg, A, B, (A * A * A - A) * c, (B * B * B - B) * c};
    }
  } else {
    im.lin_seg.resize(Nf);
    im.lin_u.resize(Nf);
    for (int i = 0; i < Nf; ++i) {
      const double xf = (i + 1) * T.fine.h;
      int seg = std::min(int(xf / im.hc), im.M - 2);
      im.lin_seg[i] = seg;
      im.lin_u[i] = xf / im.hc - seg;
    }
  }
}

Prolongator::~Prolongator() = default;
Prolongator::Prolongator(Prolongator&&) noexcept = default;
const TransferOperator& Prolongator::op() const { return impl_->T; }

std::vector<double> Prolongator::apply(const std::vector<double>& vc,
                                       const VecOps* vo) const {
  const Impl& im = *impl_;
  const Grid2D& gc = im.T.coarse;
  const Grid2D& gf = im.T.fine;
  if (vc.size() != static_cast<std::size_t>(gc.n))
    throw std::invalid_argument("prolongate: coarse vector length mismatch");
  const int M = im.M;
  const int Nf = gf.N;

  // Stage 1: interpolate along x for every coarse row; boundary rows are zero.
  // W is Nf x M, column j = coarse row j-1 (columns 0 and M-1 stay zero).
  std::vector<double> W(std::size_t(Nf) * M, 0.0);
  std::vector<double> line(M), rhs(M);
  for (int jc = 0; jc < gc.N; ++jc) {
    line[0] = 0;
    line[M - 1] = 0;
    for (int ic = 0; ic < gc.N; ++ic) line[ic + 1] = vc[gc.idx(ic, jc)];
    double* wcol = W.data() + std::size_t(jc + 1) * Nf;
    if (im.T.method == TransferMethod::spline)
      im.spline_line(line, rhs, wcol, 1);
    else
      im.linear_line(line, wcol, 1);
  }

  // Stage 2: interpolate along y for every fine column.  vf is x-fastest, so
  // fine column i lands at stride N across rows.
  std::vector<double> vf(std::size_t(gf.n));
  std::vector<double> yline(M);
  for (int i = 0; i < Nf; ++i) {
    for (int j = 0; j < M; ++j) yline[j] = W[std::size_t(j) * Nf + i];
    if (im.T.method == TransferMethod::spline)
      im.spline_line(yline, rhs, vf.data() + i, Nf);
    else
      im.linear_line(yline, vf.data() + i, Nf);
  }
  if (vo) vo->counter()->vops += 2; // two sweeps over fine-grid-sized data
  return vf;
}

std::vector<double> prolongate(const TransferOperator& T,
                               const std::vector<double>& v_coarse) {
  return Prolongator(T).apply(v_coarse);
}

// ---------------------------------------------------------------------------
// Rayleigh-Ritz on a transferred block
// ---------------------------------------------------------------------------

RayleighRitzResult rayleigh_ritz(InstrumentedOperator& op,
                                 const std::vector<double>& V, int k,
                                 const VecOps& vo) {
  const std::size_t n = op.n();
  if (k <= 0 || V.size() != n * std::size_t(k))
    throw std::invalid_argument("rayleigh_ritz: bad block shape");

  RayleighRitzResult rr;
  rr.Q = V;
  rr.k = orthonormalize_block(n, k, rr.Q.data(), vo);
  if (rr.k == 0) throw std::invalid_argument("rayleigh_ritz: zero block");
  rr.Q.resize(n * std::size_t(rr.k));
  k = rr.k;

  rr.AQ.resize(n * std::size_t(k));
  for (int j = 0; j < k; ++j)
    op.apply(rr.Q.data() + std::size_t(j) * n, rr.AQ.data() + std::size_t(j) * n);

  rr.H = DenseMatrix(k, k);
  vo.gemm_tn(n, k, k, rr.Q.data(), rr.AQ.data(), rr.H.a.data());

  EigResult eig = dense_eig(rr.H);

  // Ascending |theta|; conjugate partners stay adjacent (descending imag
  // within a tie so the +i member comes first).
  std::vector<int> ord(k);
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](int a, int b) {
    const double ma = std::abs(eig.values[a]), mb = std::abs(eig.values[b]);
    if (ma != mb) return ma < mb;
    if (eig.values[a].real() != eig.values[b].real())
      return eig.values[a].real() < eig.values[b].real();
    return eig.values[a].imag() > eig.values[b].imag();
  });

  rr.values.resize(k);
  rr.vectors.resize(std::size_t(k) * k);
  for (int j = 0; j < k; ++j) {
    rr.values[j] = eig.values[ord[j]];
    for (int i = 0; i < k; ++i)
      rr.vectors[std::size_t(j) * k + i] = eig.vectors[std::size_t(ord[j]) * k + i];
  }

  // Residual norms ||A(Qg) - theta(Qg)|| / ||Qg|| straight from the cached
  // blocks; conjugate pairs share one computation over (Re g, Im g).
  rr.resnorms.assign(k, 0.0);
  std::vector<double> gr(k), gi(k), yr(n), yi(n), zr(n), zi(n);
  for (int j = 0; j < k;) {
    const std::complex<double> th = rr.values[j];
    const bool pair = th.imag() != 0.0 && j + 1 < k &&
                      rr.values[j + 1] == std::conj(th);
    for (int i = 0; i < k; ++i) {
      gr[i] = rr.vectors[std::size_t(j) * k + i].real();
      gi[i] = rr.vectors[std::size_t(j) * k + i].imag();
    }
    std::fill(yr.begin(), yr.end(), 0.0);
    std::fill(zr.begin(), zr.end(), 0.0);
    vo.gemv_n(n, k, rr.Q.data(), gr.data(), yr.data());
    vo.gemv_n(n, k, rr.AQ.data(), gr.data(), zr.data());
    if (pair || th.imag() != 0.0) {
      std::fill(yi.begin(), yi.end(), 0.0);
      std::fill(zi.begin(), zi.end(), 0.0);
      vo.gemv_n(n, k, rr.Q.data(), gi.data(), yi.data());
      vo.gemv_n(n, k, rr.AQ.data(), gi.data(), zi.data());
      const double a = th.real(), b = th.imag();
      // real part: zr - (a yr - b yi); imag part: zi - (a yi + b yr)
      vo.axpy(n, -a, yr.data(), zr.data());
      vo.axpy(n, b, yi.data(), zr.data());
      vo.axpy(n, -a, yi.data(), zi.data());
      vo.axpy(n, -b, yr.data(), zi.data());
      const double rn = std::hypot(vo.nrm2(n, zr.data()), vo.nrm2(n, zi.data()));
      const double yn = std::hypot(vo.nrm2(n, yr.data()), vo.nrm2(n, yi.data()));
      rr.resnorms[j] = rn / yn;
      if (pair) {
        rr.resnorms[j + 1] = rr.resnorms[j];
        j += 2;
        continue;
      }
      ++j;
      continue;
    }
    vo.axpy(n, -th.real(), yr.data(), zr.data());
    rr.resnorms[j] = vo.nrm2(n, zr.data()) / vo.nrm2(n, yr.data());
    ++j;
  }
  return rr;
}

std::vector<double> ritz_vectors_real(const RayleighRitzResult& rr,
                                      std::size_t n, const VecOps& vo) {
  const int k = rr.k;
  DenseMatrix G(k, k);
  for (int j = 0; j < k;) {
    const std::complex<double> th = rr.values[j];
    const bool pair = th.imag() != 0.0 && j + 1 < k &&
                      rr.values[j + 1] == std::conj(th);
    if (pair) {
      for (int i = 0; i < k; ++i) {
        G(i, j) = rr.vectors[std::size_t(j) * k + i].real();
        G(i, j + 1) = rr.vectors[std::size_t(j) * k + i].imag();
      }
      j += 2;
    } else {
      for (int i = 0; i < k; ++i)
        G(i, j) = rr.vectors[std::size_t(j) * k + i].real();
      ++j;
    }
  }
  std::vector<double> Y(n * std::size_t(k));
  vo.gemm_nn(n, k, k, rr.Q.data(), G.a.data(), Y.data());
  return Y;
}

} // namespace tgk
