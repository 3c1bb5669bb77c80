#include "tgk/gmres.hpp"

#include "tgk/ortho.hpp"
#include "dense_util.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <stdexcept>

// Eigenvector-augmented restarted Rayleigh-Ritz.  The working set is a basis
// Q (first kh columns: current Ritz block; the rest: a Krylov chain seeded
// with a target pair's residual) together with W = A Q kept exact across
// restarts (restarting maps both blocks through the same orthonormal
// transform, so no operator applies are ever spent re-forming products).
//
// Eigen-residual norms come from ||(A - theta) Q g||^2
//   = ||H g - theta g||^2 + g^H S g,   H = Q^T W,  S = R^T R,  R = (I-QQ^T)W.
// S is never formed from length-n data on the hot path: only the Ritz-block
// columns and the final Krylov column have out-of-basis residuals, their
// Gram block is carried through restarts by the dense recursion
//   S_next = M^T M + G^T S G,  M = (I - G G^T) H G,
// depleted during extension by the new rows of H, and completed by the
// h_extra cross terms of the final column.

namespace tgk {
namespace {

struct Extraction {
  int mcur = 0;
  std::vector<std::complex<double>> vals; // ordered ascending |theta|
  std::vector<std::complex<double>> vecs; // mcur x mcur, ordered columns
  std::vector<double> resnorms;           // per ordered column
};

// Ritz pairs of H(0:mcur,0:mcur) with residual norms via the S quadratic form.
Extraction extract(const DenseMatrix& H, const DenseMatrix& S, int mcur) {
  DenseMatrix He(mcur, mcur);
  for (int j = 0; j < mcur; ++j)
    for (int i = 0; i < mcur; ++i) He(i, j) = H(i, j);
  EigResult eig = dense_eig(He);
  const std::vector<int> ord = detail::sort_eigs_ascending(eig.values);

  Extraction ex;
  ex.mcur = mcur;
  ex.vals.resize(mcur);
  ex.vecs.resize(std::size_t(mcur) * mcur);
  ex.resnorms.resize(mcur);
  for (int j = 0; j < mcur; ++j) {
    ex.vals[j] = eig.values[ord[j]];
    const std::complex<double>* g = eig.vectors.data() + std::size_t(ord[j]) * mcur;
    std::copy(g, g + mcur, ex.vecs.begin() + std::size_t(j) * mcur);

    double num2 = 0.0, den2 = 0.0, quad = 0.0;
    for (int i = 0; i < mcur; ++i) {
      std::complex<double> t = -ex.vals[j] * g[i];
      for (int q = 0; q < mcur; ++q) t += He(i, q) * g[q];
      num2 += std::norm(t);
      den2 += std::norm(g[i]);
    }
    for (int c = 0; c < mcur; ++c) {
      double sr = 0.0, si = 0.0;
      for (int d = 0; d < mcur; ++d) {
        sr += S(c, d) * g[d].real();
        si += S(c, d) * g[d].imag();
      }
      quad += g[c].real() * sr + g[c].imag() * si;
    }
    quad = std::max(quad, 0.0); // recursion roundoff can dip below zero
    ex.resnorms[j] = den2 > 0.0 ? std::sqrt((num2 + quad) / den2) : 0.0;
  }
  return ex;
}

int leading_streak(const Extraction& ex, double rtolev, int count) {
  int s = 0;
  const int lim = std::min<int>(count, int(ex.resnorms.size()));
  while (s < lim && ex.resnorms[s] <= rtolev) ++s;
  return s;
}

double max_leading(const Extraction& ex, int count) {
  double mx = 0.0;
  const int lim = std::min<int>(count, int(ex.resnorms.size()));
  for (int j = 0; j < lim; ++j) mx = std::max(mx, ex.resnorms[j]);
  return mx;
}

// Deterministic last-resort seed fill (xorshift), used only if every Ritz
// residual direction has collapsed into the basis.
void fallback_fill(std::vector<double>& w) {
  std::uint64_t s = 0x9E3779B97F4A7C15ull;
  for (double& v : w) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    v = double(s >> 11) * 0x1.0p-53 - 0.5;
  }
}

} // namespace

ArnoldiEResult arnoldi_e_improve(InstrumentedOperator& op,
                                 const std::vector<double>& V0, int k, int m,
                                 int target_count, double rtolev,
                                 const ArnoldiEOptions& opt) {
  const std::size_t n = op.n();
  if (k < 1) throw std::invalid_argument("block must have at least one column");
  if (!(m >= k + 1 && std::size_t(m) <= n))
    throw std::invalid_argument("need k+1 <= m <= n");
  if (V0.size() != n * std::size_t(k))
    throw std::invalid_argument("V0 must be n x k");
  target_count = std::clamp(target_count, 0, k);
  VecOps vo(op.counter);

  ArnoldiEResult res;
  std::vector<double> V(n * std::size_t(m), 0.0);
  std::vector<double> W(n * std::size_t(m), 0.0);
  std::vector<double> stage, u(n), w(n), vex(n);
  std::vector<double> h(std::size_t(m) + 1, 0.0);
  DenseMatrix H(m, m), S(m, m);

  // ----- entry: orthonormalize the block and evaluate it in place -----
  std::memcpy(V.data(), V0.data(), n * std::size_t(k) * sizeof(double));
  int kh = orthonormalize_block(n, k, V.data(), vo, opt.drop_tol);
  if (kh == 0) {
    res.trace.add("setup", 0, opt.level, *op.counter, 0.0);
    res.trace.status = SolveStatus::breakdown;
    return res;
  }
  for (int c = 0; c < kh; ++c)
    op.apply(V.data() + std::size_t(c) * n, W.data() + std::size_t(c) * n);
  std::vector<double> Ctmp(std::size_t(kh) * kh, 0.0);
  vo.gemm_tn(n, kh, kh, V.data(), W.data(), Ctmp.data());
  for (int c = 0; c < kh; ++c)
    for (int i = 0; i < kh; ++i) H(i, c) = Ctmp[std::size_t(c) * kh + i];
  // S = R^T R, R = W - V (V^T W), formed explicitly once
  stage.resize(n * std::size_t(kh));
  vo.gemm_nn(n, kh, kh, V.data(), Ctmp.data(), stage.data());
  for (int c = 0; c < kh; ++c)
    vo.axpby(n, 1.0, W.data() + std::size_t(c) * n, -1.0,
             stage.data() + std::size_t(c) * n, stage.data() + std::size_t(c) * n);
  std::fill(Ctmp.begin(), Ctmp.end(), 0.0);
  vo.gemm_tn(n, kh, kh, stage.data(), stage.data(), Ctmp.data());
  for (int c = 0; c < kh; ++c)
    for (int i = 0; i < kh; ++i) S(i, c) = Ctmp[std::size_t(c) * kh + i];

  int mcur = kh;
  Extraction ex = extract(H, S, mcur);
  int tgt = std::min(target_count, kh);
  res.trace.add("setup", 0, opt.level, *op.counter, max_leading(ex, tgt));
  bool met = leading_streak(ex, rtolev, tgt) >= tgt;

  // ----- improvement cycles -----
  for (int cycle = 1; !met && cycle <= opt.max_cycles; ++cycle) {
    // --- restart: rotate onto the leading Ritz block ---
    const int sel = detail::select_keff(ex.vals, kh, std::min(kh + 1, m - 1));
    if (sel < 1) break;
    DenseMatrix G = detail::realify_columns(ex.vals, ex.vecs, mcur, sel);
    const int keff = detail::orthonormalize_dense(mcur, sel, G.a.data(), opt.drop_tol);
    if (keff < 1) break;

    // dense S recursion: S_next = M^T M + G^T S G with M = (I - G G^T) H G
    DenseMatrix HG(mcur, keff), GtHG(keff, keff), Srst(keff, keff);
    for (int c = 0; c < keff; ++c)
      for (int i = 0; i < mcur; ++i) {
        double t = 0.0;
        for (int q = 0; q < mcur; ++q) t += H(i, q) * G(q, c);
        HG(i, c) = t;
      }
    for (int c = 0; c < keff; ++c)
      for (int i = 0; i < keff; ++i) {
        double t = 0.0;
        for (int q = 0; q < mcur; ++q) t += G(q, i) * HG(q, c);
        GtHG(i, c) = t;
      }
    DenseMatrix M(mcur, keff);
    for (int c = 0; c < keff; ++c)
      for (int i = 0; i < mcur; ++i) {
        double t = HG(i, c);
        for (int q = 0; q < keff; ++q) t -= G(i, q) * GtHG(q, c);
        M(i, c) = t;
      }
    std::vector<double> SG(std::size_t(mcur) * keff);
    for (int c = 0; c < keff; ++c)
      for (int i = 0; i < mcur; ++i) {
        double t = 0.0;
        for (int q = 0; q < mcur; ++q) t += S(i, q) * G(q, c);
        SG[std::size_t(c) * mcur + i] = t;
      }
    for (int c = 0; c < keff; ++c)
      for (int i = 0; i < keff; ++i) {
        double t = 0.0;
        for (int q = 0; q < mcur; ++q)
          t += M(q, i) * M(q, c) + G(q, i) * SG[std::size_t(c) * mcur + q];
        Srst(i, c) = t;
      }

    // --- stage both big blocks through the same transform ---
    stage.resize(n * std::size_t(keff));
    vo.gemm_nn(n, mcur, keff, V.data(), G.a.data(), stage.data());
    std::memcpy(V.data(), stage.data(), n * std::size_t(keff) * sizeof(double));
    vo.gemm_nn(n, mcur, keff, W.data(), G.a.data(), stage.data());
    std::memcpy(W.data(), stage.data(), n * std::size_t(keff) * sizeof(double));

    // --- Krylov seed: residual of the smallest unconverged pair ---
    // Selected pair coordinates survive the rotation (their realified span is
    // exactly span(G)), so the residual is rebuilt from the staged blocks:
    //   w = W ghat_r - V (a ghat_r - b ghat_i),  ghat = G^T g.
    std::vector<int> leaders_unconv, leaders_conv;
    for (int j = 0; j < sel;) {
      (ex.resnorms[j] > rtolev ? leaders_unconv : leaders_conv).push_back(j);
      j += detail::is_conj_pair(ex.vals, j) ? 2 : 1;
    }
    std::vector<int> candidates = leaders_unconv;
    candidates.insert(candidates.end(), leaders_conv.begin(), leaders_conv.end());

    bool seeded = false;
    std::vector<double> gr(mcur), gi(mcur), ghr(keff), ghi(keff), coef(keff);
    for (std::size_t ci = 0; ci <= candidates.size() && !seeded; ++ci) {
      if (ci < candidates.size()) {
        const int j = candidates[ci];
        const std::complex<double>* g = ex.vecs.data() + std::size_t(j) * mcur;
        for (int i = 0; i < mcur; ++i) {
          gr[i] = g[i].real();
          gi[i] = g[i].imag();
        }
        detail::matvec_t(G, mcur, keff, gr.data(), ghr.data());
        detail::matvec_t(G, mcur, keff, gi.data(), ghi.data());
        const double a = ex.vals[j].real(), b = ex.vals[j].imag();
        for (int i = 0; i < keff; ++i) coef[i] = -(a * ghr[i] - b * ghi[i]);
        std::fill(w.begin(), w.end(), 0.0);
        vo.gemv_n(n, keff, W.data(), ghr.data(), w.data());
        vo.gemv_n(n, keff, V.data(), coef.data(), w.data());
      } else {
        fallback_fill(w); // every residual collapsed: any new direction works
      }
      std::fill(h.begin(), h.begin() + keff, 0.0);
      const double post = mgs_orthogonalize(n, V.data(), keff, w.data(), h.data(), vo);
      double pre2 = post * post;
      for (int i = 0; i < keff; ++i) pre2 += h[i] * h[i];
      if (post > opt.drop_tol * std::sqrt(pre2) && post > 0.0) {
        vo.copy_scaled(n, 1.0 / post, w.data(), V.data() + std::size_t(keff) * n);
        seeded = true;
      }
    }
    kh = keff;
    if (!seeded) {
      // No admissible extension direction: fall back to the rotated block as
      // the final state (its pairs are exactly the selected ones).
      std::fill(H.a.begin(), H.a.end(), 0.0);
      std::fill(S.a.begin(), S.a.end(), 0.0);
      for (int c = 0; c < keff; ++c)
        for (int i = 0; i < keff; ++i) {
          H(i, c) = GtHG(i, c);
          S(i, c) = Srst(i, c);
        }
      mcur = kh;
      ex = extract(H, S, mcur);
      break;
    }
    mcur = kh + 1;

    // --- Krylov extension with exact products stored columnwise ---
    std::fill(H.a.begin(), H.a.end(), 0.0);
    std::fill(S.a.begin(), S.a.end(), 0.0);
    double h_extra = 0.0;
    std::vector<double> hx(kh, 0.0);
    for (int jc = kh; jc < m; ++jc) {
      op.apply(V.data() + std::size_t(jc) * n, W.data() + std::size_t(jc) * n);
      std::memcpy(u.data(), W.data() + std::size_t(jc) * n, n * sizeof(double));
      std::fill(h.begin(), h.begin() + jc + 1, 0.0);
      const double post = mgs_orthogonalize(n, V.data(), jc + 1, u.data(), h.data(), vo);
      double pre2 = post * post;
      for (int i = 0; i <= jc; ++i) pre2 += h[i] * h[i];
      for (int i = 0; i <= jc; ++i) H(i, jc) = h[i];
      if (jc + 1 < m) {
        if (!(post > opt.drop_tol * std::sqrt(pre2))) {
          mcur = jc + 1; // chain exhausted: the subspace is (near-)invariant
          break;
        }
        H(jc + 1, jc) = post;
        vo.copy_scaled(n, 1.0 / post, u.data(), V.data() + std::size_t(jc + 1) * n);
        mcur = jc + 2;
      } else {
        mcur = m;
        if (post > opt.drop_tol * std::sqrt(pre2)) {
          h_extra = post;
          vo.copy_scaled(n, 1.0 / post, u.data(), vex.data());
          vo.gemv_t(n, kh, W.data(), vex.data(), hx.data());
        }
      }
    }

    // --- cycle-end extraction ---
    // Ritz-block columns of H recomputed fresh from the stored products.
    Ctmp.assign(std::size_t(mcur) * kh, 0.0);
    vo.gemm_tn(n, mcur, kh, V.data(), W.data(), Ctmp.data());
    for (int c = 0; c < kh; ++c)
      for (int i = 0; i < mcur; ++i) H(i, c) = Ctmp[std::size_t(c) * mcur + i];
    // Residual Gram: restart value depleted by the new rows, plus the final
    // column's out-of-basis cross terms.
    for (int c = 0; c < kh; ++c)
      for (int d = 0; d <= c; ++d) {
        double s = Srst(d, c);
        for (int i = kh; i < mcur; ++i) s -= H(i, d) * H(i, c);
        S(d, c) = S(c, d) = s;
      }
    if (h_extra > 0.0) {
      for (int c = 0; c < kh; ++c)
        S(c, mcur - 1) = S(mcur - 1, c) = h_extra * hx[c];
      S(mcur - 1, mcur - 1) = h_extra * h_extra;
    }
    ex = extract(H, S, mcur);
    res.cycles = cycle;
    tgt = std::min(target_count, kh);
    res.trace.add("arnoldi-e", cycle, opt.level, *op.counter, max_leading(ex, tgt));
    met = leading_streak(ex, rtolev, tgt) >= tgt;
  }

  // ----- finalize: realified Ritz block, exact products, explicit audit -----
  int kout = detail::select_keff(ex.vals, kh, mcur);
  if (kout > 0) {
    DenseMatrix G = detail::realify_columns(ex.vals, ex.vecs, mcur, kout);
    stage.resize(n * std::size_t(kout));
    vo.gemm_nn(n, mcur, kout, V.data(), G.a.data(), stage.data());
    res.vectors.assign(stage.begin(), stage.begin() + n * std::size_t(kout));
    vo.gemm_nn(n, mcur, kout, W.data(), G.a.data(), stage.data());
    res.avectors.assign(stage.begin(), stage.begin() + n * std::size_t(kout));
  }
  res.k = kout;
  res.eig.resize(kout);
  std::vector<double> w1(n), w2(n);
  for (int c = 0; c < kout;) {
    const bool pair = detail::is_conj_pair(ex.vals, c) && c + 1 < kout;
    const double* yr = res.vectors.data() + std::size_t(c) * n;
    const double a = ex.vals[c].real(), b = ex.vals[c].imag();
    double num, den;
    if (pair) {
      const double* yi = res.vectors.data() + std::size_t(c + 1) * n;
      op.apply_audit(yr, w1.data());
      op.apply_audit(yi, w2.data());
      vo.axpy(n, -a, yr, w1.data());
      vo.axpy(n, b, yi, w1.data());
      vo.axpy(n, -a, yi, w2.data());
      vo.axpy(n, -b, yr, w2.data());
      num = std::hypot(vo.nrm2(n, w1.data()), vo.nrm2(n, w2.data()));
      den = std::hypot(vo.nrm2(n, yr), vo.nrm2(n, yi));
    } else {
      op.apply_audit(yr, w1.data());
      vo.axpy(n, -a, yr, w1.data());
      num = vo.nrm2(n, w1.data());
      den = vo.nrm2(n, yr);
    }
    const double explicit_rn = den > 0.0 ? num / den : 0.0;
    for (int q = c; q < c + (pair ? 2 : 1); ++q) {
      res.eig[q].theta = ex.vals[q];
      res.eig[q].estimate = ex.resnorms[q];
      res.eig[q].resnorm = explicit_rn;
      res.eig[q].audited = true;
    }
    c += pair ? 2 : 1;
  }
  res.converged = 0;
  while (res.converged < kout && res.eig[res.converged].resnorm <= rtolev)
    ++res.converged;
  res.trace.status = (res.converged >= std::min(target_count, kout))
                         ? SolveStatus::converged
                         : SolveStatus::maxit;
  return res;
}

} // namespace tgk
