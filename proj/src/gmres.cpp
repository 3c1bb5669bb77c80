#include "tgk/gmres.hpp"

#include "tgk/ortho.hpp"
#include "dense_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

namespace tgk {

// ---------------------------------------------------------------------------
// Restart policies
// ---------------------------------------------------------------------------

RestartPolicy RestartPolicy::fixed_m(int m) {
  if (m < 1) throw std::invalid_argument("restart length must be >= 1");
  RestartPolicy p;
  p.kind = Kind::fixed;
  p.m = m;
  return p;
}

RestartPolicy RestartPolicy::from_schedule(std::vector<int> lengths) {
  if (lengths.empty())
    throw std::invalid_argument("restart schedule must be nonempty");
  for (int v : lengths)
    if (v < 1) throw std::invalid_argument("restart lengths must be >= 1");
  RestartPolicy p;
  p.kind = Kind::schedule;
  p.lengths = std::move(lengths);
  return p;
}

RestartPolicy RestartPolicy::random_lengths(int max_len, std::uint64_t seed) {
  if (max_len < 1) throw std::invalid_argument("max restart length must be >= 1");
  RestartPolicy p;
  p.kind = Kind::random;
  p.max_len = max_len;
  p.seed = seed;
  return p;
}

namespace {

// ---------------------------------------------------------------------------
// Plain GMRES cycle with progressive Givens QR
// ---------------------------------------------------------------------------

struct Rotation {
  double c = 1.0, s = 0.0;
};

Rotation make_rotation(double a, double b) {
  if (b == 0.0) return {1.0, 0.0};
  const double h = std::hypot(a, b);
  return {a / h, b / h};
}

struct CycleScratch {
  std::vector<double> V; // n x (m+1) basis
  std::vector<double> u; // expansion vector
  std::vector<double> h; // raw column, m+1
  DenseMatrix Hraw;      // (m+1) x m unrotated Hessenberg (kept for callers)
  DenseMatrix R;         // m x m triangular factor
  std::vector<Rotation> rot;
  std::vector<double> g, y, z;

  void ensure(std::size_t n, int m) {
    if (V.size() < n * std::size_t(m + 1)) V.assign(n * std::size_t(m + 1), 0.0);
    if (u.size() < n) u.assign(n, 0.0);
    if (Hraw.nrows < m + 1) {
      Hraw = DenseMatrix(m + 1, m);
      R = DenseMatrix(m, m);
    }
    h.assign(std::size_t(m) + 1, 0.0);
    rot.assign(std::size_t(m), Rotation{});
    g.assign(std::size_t(m) + 1, 0.0);
    y.assign(std::size_t(m), 0.0);
    z.assign(std::size_t(m) + 1, 0.0);
  }
};

struct CycleOutcome {
  int iters = 0;        // operator applies spent this cycle
  double est = 0.0;     // minimal-residual norm at exit
  bool breakdown = false;
  bool early = false;
};

// One minimal-residual cycle over x, r (both in-out; r must equal b - A x on
// entry).  The residual vector is rebuilt from the basis at the end — no
// operator apply is spent on it — so the updated r is exactly consistent
// with the returned estimate in exact arithmetic.
CycleOutcome run_cycle(InstrumentedOperator& op, std::vector<double>& x,
                       std::vector<double>& r, int m, double abs_tol,
                       VecOps& vo, CycleScratch& ws) {
  const std::size_t n = op.n();
  ws.ensure(n, m);
  CycleOutcome out;

  const double beta = vo.nrm2(n, r.data());
  out.est = beta;
  if (!(beta > 0.0)) return out; // nothing to do (already exact)

  vo.copy_scaled(n, 1.0 / beta, r.data(), ws.V.data());
  std::fill(ws.g.begin(), ws.g.end(), 0.0);
  ws.g[0] = beta;

  bool brk = false, early = false;
  int j = 0;
  for (int jj = 0; jj < m; ++jj) {
    const double* vj = ws.V.data() + std::size_t(jj) * n;
    op.apply(vj, ws.u.data());
    std::fill(ws.h.begin(), ws.h.begin() + jj + 2, 0.0);
    const double nrm =
        mgs_orthogonalize(n, ws.V.data(), jj + 1, ws.u.data(), ws.h.data(), vo);
    ws.h[jj + 1] = nrm;
    for (int i = 0; i <= jj + 1; ++i) ws.Hraw(i, jj) = ws.h[i];

    for (int i = 0; i < jj; ++i) {
      const double a = ws.h[i], b = ws.h[i + 1];
      ws.h[i] = ws.rot[i].c * a + ws.rot[i].s * b;
      ws.h[i + 1] = -ws.rot[i].s * a + ws.rot[i].c * b;
    }
    ws.rot[jj] = make_rotation(ws.h[jj], ws.h[jj + 1]);
    for (int i = 0; i < jj; ++i) ws.R(i, jj) = ws.h[i];
    ws.R(jj, jj) = ws.rot[jj].c * ws.h[jj] + ws.rot[jj].s * ws.h[jj + 1];
    ws.g[jj + 1] = -ws.rot[jj].s * ws.g[jj];
    ws.g[jj] = ws.rot[jj].c * ws.g[jj];
    out.est = std::abs(ws.g[jj + 1]);
    j = jj + 1;

    if (nrm == 0.0) { // exact solution inside the subspace
      brk = true;
      break;
    }
    vo.copy_scaled(n, 1.0 / nrm, ws.u.data(), ws.V.data() + std::size_t(jj + 1) * n);
    if (abs_tol > 0.0 && out.est <= abs_tol) {
      early = true;
      break;
    }
  }

  // Back substitution R y = g(0..j)
  for (int i = j - 1; i >= 0; --i) {
    double t = ws.g[i];
    for (int q = i + 1; q < j; ++q) t -= ws.R(i, q) * ws.y[q];
    ws.y[i] = ws.R(i, i) != 0.0 ? t / ws.R(i, i) : 0.0;
  }
  vo.gemv_n(n, j, ws.V.data(), ws.y.data(), x.data());

  // Residual vector in basis coordinates: Q^T (g_j e_j)
  std::fill(ws.z.begin(), ws.z.begin() + j + 1, 0.0);
  ws.z[j] = ws.g[j];
  for (int i = j - 1; i >= 0; --i) {
    const double a = ws.z[i], b = ws.z[i + 1];
    ws.z[i] = ws.rot[i].c * a - ws.rot[i].s * b;
    ws.z[i + 1] = ws.rot[i].s * a + ws.rot[i].c * b;
  }
  const int basis_cols = brk ? j : j + 1;
  std::fill(r.begin(), r.end(), 0.0);
  vo.gemv_n(n, basis_cols, ws.V.data(), ws.z.data(), r.data());

  out.iters = j;
  out.breakdown = brk;
  out.early = early;
  return out;
}

// r = b - A x, skipping the operator apply when x is exactly zero.
void initial_residual(InstrumentedOperator& op, const std::vector<double>& x,
                      const std::vector<double>& b, std::vector<double>& r,
                      std::vector<double>& tmp, VecOps& vo) {
  const std::size_t n = op.n();
  const bool zero_guess =
      std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
  r = b;
  if (!zero_guess) {
    tmp.resize(n);
    op.apply(x.data(), tmp.data());
    vo.axpby(n, 1.0, b.data(), -1.0, tmp.data(), r.data());
  }
}

} // namespace

// ---------------------------------------------------------------------------
// Public single cycle
// ---------------------------------------------------------------------------

GmresCycleResult gmres_cycle(InstrumentedOperator& op,
                             const std::vector<double>& x0,
                             const std::vector<double>& b, int m, double tol,
                             ArnoldiFactorization* fac) {
  const std::size_t n = op.n();
  if (m < 1) throw std::invalid_argument("gmres_cycle: m must be >= 1");
  if (b.size() != n) throw std::invalid_argument("gmres_cycle: rhs size mismatch");
  if (!x0.empty() && x0.size() != n)
    throw std::invalid_argument("gmres_cycle: x0 size mismatch");
  VecOps vo(op.counter);

  GmresCycleResult res;
  res.x = x0.empty() ? std::vector<double>(n, 0.0) : x0;
  std::vector<double> tmp;
  initial_residual(op, res.x, b, res.r, tmp, vo);

  CycleScratch ws;
  const CycleOutcome out = run_cycle(op, res.x, res.r, m, tol, vo, ws);
  res.resnorm = out.est;
  res.iters = out.iters;
  res.breakdown = out.breakdown;
  res.trace.add("gmres", 1, 0, *op.counter, out.est);
  res.trace.status = (tol > 0.0 && out.est <= tol) ? SolveStatus::converged
                                                   : SolveStatus::maxit;

  if (fac) {
    fac->n = n;
    fac->j = out.iters;
    const int cols = out.iters + 1;
    fac->V.assign(n * std::size_t(cols), 0.0);
    const int have = out.breakdown ? out.iters : cols;
    std::memcpy(fac->V.data(), ws.V.data(), n * std::size_t(have) * sizeof(double));
    fac->Hbar = DenseMatrix(cols, out.iters);
    for (int jj = 0; jj < out.iters; ++jj)
      for (int i = 0; i <= std::min(jj + 1, out.iters); ++i)
        fac->Hbar(i, jj) = ws.Hraw(i, jj);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Restarted driver
// ---------------------------------------------------------------------------

GmresResult gmres_driver(InstrumentedOperator& op, std::vector<double> x0,
                         const std::vector<double>& b,
                         const RestartPolicy& policy,
                         const GmresDriverOptions& opt) {
  const std::size_t n = op.n();
  if (b.size() != n) throw std::invalid_argument("gmres: rhs size mismatch");
  if (!x0.empty() && x0.size() != n)
    throw std::invalid_argument("gmres: x0 size mismatch");
  VecOps vo(op.counter);

  GmresResult res;
  res.x = std::move(x0);
  if (res.x.empty()) res.x.assign(n, 0.0);
  std::vector<double> tmp;
  initial_residual(op, res.x, b, res.r, tmp, vo);
  const double r0n = vo.nrm2(n, res.r.data());
  res.r0_norm = r0n;
  const double target = opt.rtol * r0n;
  res.trace.add("setup", 0, opt.level, *op.counter, r0n);

  std::mt19937_64 eng(policy.seed);
  std::uniform_int_distribution<int> draw(1, std::max(1, policy.max_len));
  const std::uint64_t mvp0 = op.counter->mvp;
  CycleScratch ws;
  double est = r0n;
  int cycle = 0;
  SolveStatus status = SolveStatus::maxit;

  while (true) {
    if (est <= target) {
      status = SolveStatus::converged;
      break;
    }
    if (cycle >= opt.max_cycles) break;
    const std::uint64_t used = op.counter->mvp - mvp0;
    if (used >= opt.max_mvp) break;

    int mlen = 0;
    switch (policy.kind) {
      case RestartPolicy::Kind::fixed: mlen = policy.m; break;
      case RestartPolicy::Kind::schedule:
        mlen = policy.lengths[cycle % policy.lengths.size()];
        break;
      case RestartPolicy::Kind::random: mlen = draw(eng); break;
    }
    mlen = int(std::min<std::uint64_t>(std::uint64_t(mlen), opt.max_mvp - used));
    if (mlen < 1) break;

    if (opt.pre_cycle && *opt.pre_cycle)
      (*opt.pre_cycle)(res.x, res.r, res.trace, cycle + 1);

    const CycleOutcome out = run_cycle(op, res.x, res.r, mlen,
                                       opt.early_exit ? target : 0.0, vo, ws);
    est = out.est;
    ++cycle;
    res.trace.add(opt.phase, cycle, opt.level, *op.counter, est);
  }

  res.resnorm = est;
  res.cycles = cycle;
  res.status = status;
  res.trace.status = status;
  return res;
}

GmresResult gmres_restarted(InstrumentedOperator& op,
                            const std::vector<double>& x0,
                            const std::vector<double>& b,
                            const RestartPolicy& policy, double rtol,
                            std::uint64_t max_mvp) {
  GmresDriverOptions opt;
  opt.rtol = rtol;
  opt.max_mvp = max_mvp;
  return gmres_driver(op, x0, b, policy, opt);
}

// ---------------------------------------------------------------------------
// GMRES with deflated restarting
// ---------------------------------------------------------------------------

namespace {

struct HarmonicExtraction {
  bool ok = false;
  int k_eff = 0;
  std::vector<std::complex<double>> values;  // ordered ascending |theta|, k_eff
  std::vector<std::complex<double>> vectors; // j_dim x k_eff
  std::vector<double> estimates;             // || Hbar g - theta [g;0] || / ||g||
};

// Harmonic Ritz pairs of the j_dim-dimensional factorization: eigenpairs of
// H + h^2 H^{-T} e_j e_j^T, ordered ascending by magnitude.
HarmonicExtraction extract_harmonic(const DenseMatrix& Hb, int j_dim, int k) {
  HarmonicExtraction ex;
  DenseMatrix Ht(j_dim, j_dim); // H^T
  for (int j = 0; j < j_dim; ++j)
    for (int i = 0; i < j_dim; ++i) Ht(i, j) = Hb(j, i);
  DenseLu lu(Ht);
  if (lu.singular()) return ex;
  std::vector<double> e(j_dim, 0.0), f(j_dim);
  e[j_dim - 1] = 1.0;
  f = lu.solve(e);

  const double hlast = Hb(j_dim, j_dim - 1);
  DenseMatrix B(j_dim, j_dim);
  for (int j = 0; j < j_dim; ++j)
    for (int i = 0; i < j_dim; ++i) B(i, j) = Hb(i, j);
  const double h2 = hlast * hlast;
  for (int i = 0; i < j_dim; ++i) B(i, j_dim - 1) += h2 * f[i];

  EigResult eig = dense_eig(B);
  const std::vector<int> ord = detail::sort_eigs_ascending(eig.values);

  std::vector<std::complex<double>> vals(j_dim);
  for (int i = 0; i < j_dim; ++i) vals[i] = eig.values[ord[i]];
  ex.k_eff = detail::select_keff(vals, k, j_dim - 1);
  if (ex.k_eff < 1) return ex;

  ex.values.assign(vals.begin(), vals.begin() + ex.k_eff);
  ex.vectors.resize(std::size_t(j_dim) * ex.k_eff);
  ex.estimates.resize(ex.k_eff);
  for (int c = 0; c < ex.k_eff; ++c) {
    const std::complex<double>* src =
        eig.vectors.data() + std::size_t(ord[c]) * j_dim;
    std::copy(src, src + j_dim, ex.vectors.begin() + std::size_t(c) * j_dim);
    // cheap eigen-residual: ||Hbar g - theta [g;0]|| / ||g||
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= j_dim; ++i) {
      std::complex<double> t = 0.0;
      for (int q = 0; q < j_dim; ++q) t += Hb(i, q) * src[q];
      if (i < j_dim) t -= ex.values[c] * src[i];
      num += std::norm(t);
    }
    for (int i = 0; i < j_dim; ++i) den += std::norm(src[i]);
    ex.estimates[c] = den > 0.0 ? std::sqrt(num / den) : 0.0;
  }
  ex.ok = true;
  return ex;
}

} // namespace

GmresDrResult gmres_dr(InstrumentedOperator& op, const std::vector<double>& x0,
                       const std::vector<double>& b, int m, int k, double rtol,
                       int nev, double rtolev, const GmresDrOptions& opt) {
  const std::size_t n = op.n();
  if (!(1 <= k && k < m && std::size_t(m) <= n))
    throw std::invalid_argument("deflated restart needs 1 <= k < m <= n");
  if (nev < 0 || nev > k)
    throw std::invalid_argument("tracked eigenpair count must satisfy nev <= k");
  if (b.size() != n) throw std::invalid_argument("rhs size mismatch");
  if (!x0.empty() && x0.size() != n)
    throw std::invalid_argument("x0 size mismatch");
  VecOps vo(op.counter);

  GmresDrResult res;
  res.x = x0.empty() ? std::vector<double>(n, 0.0) : x0;
  std::vector<double> tmp;
  initial_residual(op, res.x, b, res.r, tmp, vo);
  const double r0n = vo.nrm2(n, res.r.data());
  res.r0_norm = r0n;
  const double target = rtol * r0n;
  res.trace.add("setup", 0, opt.level, *op.counter, r0n);
  if (!(r0n > 0.0)) {
    res.status = SolveStatus::converged;
    res.linear_converged = true;
    res.trace.status = res.status;
    return res;
  }

  std::vector<double> V(n * std::size_t(m + 1), 0.0);
  DenseMatrix Hb(m + 1, m);
  std::vector<double> cbar(std::size_t(m) + 1, 0.0);
  std::vector<double> h(std::size_t(m) + 1, 0.0);
  std::vector<double> u(n), cres(std::size_t(m) + 1, 0.0);
  std::vector<double> stage; // restart staging, n x (k+2)

  int kcur = 0;
  double est = r0n, prev_est = r0n;
  HarmonicExtraction ex;
  int j_dim = m;
  bool lucky = false;
  SolveStatus status = SolveStatus::maxit;

  for (int cycle = 1; cycle <= opt.max_cycles; ++cycle) {
    // ----- (re)initialize the basis -----
    if (kcur == 0) {
      const double beta = (cycle == 1) ? r0n : vo.nrm2(n, res.r.data());
      if (!(beta > 0.0)) {
        status = res.linear_converged ? SolveStatus::converged
                                      : SolveStatus::breakdown;
        break;
      }
      vo.copy_scaled(n, 1.0 / beta, res.r.data(), V.data());
      std::fill(cbar.begin(), cbar.end(), 0.0);
      cbar[0] = beta;
      std::fill(Hb.a.begin(), Hb.a.end(), 0.0);
    }

    // ----- Arnoldi extension to dimension m -----
    j_dim = m;
    lucky = false;
    for (int j = kcur; j < m; ++j) {
      op.apply(V.data() + std::size_t(j) * n, u.data());
      std::fill(h.begin(), h.begin() + j + 2, 0.0);
      const double nrm = mgs_orthogonalize(n, V.data(), j + 1, u.data(), h.data(), vo);
      for (int i = 0; i <= j; ++i) Hb(i, j) = h[i];
      Hb(j + 1, j) = nrm;
      if (nrm == 0.0) {
        j_dim = j + 1;
        lucky = true;
        break;
      }
      vo.copy_scaled(n, 1.0 / nrm, u.data(), V.data() + std::size_t(j + 1) * n);
    }

    // ----- minimal-residual update over the j_dim-dimensional space -----
    std::vector<double> y;
    {
      if (j_dim == m) {
        y = dense_least_squares(Hb, std::vector<double>(cbar.begin(),
                                                        cbar.begin() + m + 1))
                .x;
      } else {
        DenseMatrix Hs(j_dim + 1, j_dim);
        for (int j = 0; j < j_dim; ++j)
          for (int i = 0; i <= j_dim; ++i) Hs(i, j) = Hb(i, j);
        y = dense_least_squares(Hs, std::vector<double>(cbar.begin(),
                                                        cbar.begin() + j_dim + 1))
                .x;
      }
    }
    vo.gemv_n(n, j_dim, V.data(), y.data(), res.x.data());
    double est2 = 0.0;
    for (int i = 0; i <= j_dim; ++i) {
      double t = cbar[i];
      for (int q = 0; q < j_dim; ++q) t -= Hb(i, q) * y[q];
      cres[i] = t;
      est2 += t * t;
    }
    est = std::sqrt(est2);
    const int basis_cols = lucky ? j_dim : j_dim + 1;
    std::fill(res.r.begin(), res.r.end(), 0.0);
    vo.gemv_n(n, basis_cols, V.data(), cres.data(), res.r.data());

    res.cycles = cycle;
    res.trace.add("gmres-dr", cycle, opt.level, *op.counter, est);

    if (opt.observer && *opt.observer) {
      ArnoldiFactorization fac;
      fac.n = n;
      fac.j = j_dim;
      fac.V.assign(V.begin(), V.begin() + n * std::size_t(basis_cols));
      if (lucky) fac.V.resize(n * std::size_t(j_dim + 1), 0.0);
      fac.Hbar = DenseMatrix(j_dim + 1, j_dim);
      for (int j = 0; j < j_dim; ++j)
        for (int i = 0; i <= j_dim; ++i) fac.Hbar(i, j) = Hb(i, j);
      (*opt.observer)(fac, cycle);
    }

    const bool was_linear = res.linear_converged;
    if (!res.linear_converged && est <= target) {
      res.linear_converged = true;
      res.cycles_to_linear = cycle;
    }

    // ----- harmonic Ritz extraction -----
    ex = extract_harmonic(Hb, j_dim, k);
    if (ex.ok) {
      res.eig_converged = 0;
      for (double e : ex.estimates)
        if (e <= rtolev) ++res.eig_converged;
    }

    // periodic explicit audit of the cheap estimates
    if (ex.ok && opt.audit_every > 0 && cycle % opt.audit_every == 0) {
      std::vector<double> yr(n), yi(n), wr(n), wi(n);
      for (int c = 0; c < ex.k_eff;) {
        const bool pair = detail::is_conj_pair(ex.values, c);
        std::vector<double> gr(j_dim), gi(j_dim);
        for (int i = 0; i < j_dim; ++i) {
          gr[i] = ex.vectors[std::size_t(c) * j_dim + i].real();
          gi[i] = ex.vectors[std::size_t(c) * j_dim + i].imag();
        }
        std::fill(yr.begin(), yr.end(), 0.0);
        vo.gemv_n(n, j_dim, V.data(), gr.data(), yr.data());
        op.apply_audit(yr.data(), wr.data());
        const double a = ex.values[c].real(), bb = ex.values[c].imag();
        double num, den;
        if (ex.values[c].imag() != 0.0) {
          std::fill(yi.begin(), yi.end(), 0.0);
          vo.gemv_n(n, j_dim, V.data(), gi.data(), yi.data());
          op.apply_audit(yi.data(), wi.data());
          vo.axpy(n, -a, yr.data(), wr.data());
          vo.axpy(n, bb, yi.data(), wr.data());
          vo.axpy(n, -a, yi.data(), wi.data());
          vo.axpy(n, -bb, yr.data(), wi.data());
          num = std::hypot(vo.nrm2(n, wr.data()), vo.nrm2(n, wi.data()));
          den = std::hypot(vo.nrm2(n, yr.data()), vo.nrm2(n, yi.data()));
        } else {
          vo.axpy(n, -a, yr.data(), wr.data());
          num = vo.nrm2(n, wr.data());
          den = vo.nrm2(n, yr.data());
        }
        const double explicit_rn = den > 0.0 ? num / den : 0.0;
        const double cheap = ex.estimates[c];
        const double big = std::max(explicit_rn, cheap);
        if (big > 1e-12 * (1.0 + std::abs(ex.values[c])) &&
            std::abs(explicit_rn - cheap) > 0.1 * big)
          res.audit_ok = false;
        ex.estimates[c] = explicit_rn; // keep the better-audited value
        if (pair && c + 1 < ex.k_eff) ex.estimates[c + 1] = explicit_rn;
        c += pair ? 2 : 1;
      }
      res.eig_converged = 0;
      for (double e : ex.estimates)
        if (e <= rtolev) ++res.eig_converged;
    }

    if (res.linear_converged &&
        (nev == 0 || (ex.ok && res.eig_converged >= nev))) {
      status = SolveStatus::converged;
      break;
    }
    // stagnation only matters while the linear system is still converging
    if (!was_linear && cycle > 1 && est > prev_est * (1.0 - opt.stall_rtol)) {
      status = SolveStatus::stagnated;
      break;
    }
    prev_est = est;
    if (cycle == opt.max_cycles) break;
    if (!ex.ok) { // extraction failed: plain restart
      kcur = 0;
      continue;
    }

    // ----- deflated restart -----
    DenseMatrix G = detail::realify_columns(ex.values, ex.vectors, j_dim, ex.k_eff);
    int keff = detail::orthonormalize_dense(j_dim, ex.k_eff, G.a.data());
    if (keff < 1) {
      kcur = 0;
      continue;
    }
    // P = orth([G padded with a zero row | LS residual]); the harmonic
    // residuals are collinear with the LS residual, so the new basis carries
    // the Arnoldi relation exactly.
    DenseMatrix P(j_dim + 1, keff + 1);
    for (int c = 0; c < keff; ++c)
      for (int i = 0; i < j_dim; ++i) P(i, c) = G(i, c);
    double centry = 0.0;
    for (int i = 0; i <= j_dim; ++i) {
      P(i, keff) = cres[i];
      centry += cres[i] * cres[i];
    }
    centry = std::sqrt(centry);
    for (int pass = 0; pass < 2; ++pass)
      for (int c = 0; c < keff; ++c) {
        double d = 0.0;
        for (int i = 0; i <= j_dim; ++i) d += P(i, c) * P(i, keff);
        for (int i = 0; i <= j_dim; ++i) P(i, keff) -= d * P(i, c);
      }
    double cn = 0.0;
    for (int i = 0; i <= j_dim; ++i) cn += P(i, keff) * P(i, keff);
    cn = std::sqrt(cn);
    if (cn <= 1e-12 * centry || cn == 0.0) {
      // residual lies inside the retained eigenvector span
      if (res.linear_converged) {
        status = res.eig_converged >= nev ? SolveStatus::converged
                                          : SolveStatus::maxit;
        break;
      }
      kcur = 0;
      continue;
    }
    for (int i = 0; i <= j_dim; ++i) P(i, keff) /= cn;

    // V <- V * P (large), Hb <- P^T (Hb P_top), cbar <- P^T cres (dense)
    stage.resize(n * std::size_t(keff + 1));
    vo.gemm_nn(n, std::size_t(j_dim + 1), std::size_t(keff + 1), V.data(),
               P.a.data(), stage.data());
    std::memcpy(V.data(), stage.data(), n * std::size_t(keff + 1) * sizeof(double));

    DenseMatrix T(j_dim + 1, keff);
    for (int c = 0; c < keff; ++c)
      for (int i = 0; i <= j_dim; ++i) {
        double t = 0.0;
        for (int q = 0; q < j_dim; ++q) t += Hb(i, q) * P(q, c);
        T(i, c) = t;
      }
    std::fill(Hb.a.begin(), Hb.a.end(), 0.0);
    for (int c = 0; c < keff; ++c)
      for (int i = 0; i <= keff; ++i) {
        double t = 0.0;
        for (int q = 0; q <= j_dim; ++q) t += P(q, i) * T(q, c);
        Hb(i, c) = t;
      }
    std::vector<double> cb(keff + 1);
    for (int i = 0; i <= keff; ++i) {
      double t = 0.0;
      for (int q = 0; q <= j_dim; ++q) t += P(q, i) * cres[q];
      cb[i] = t;
    }
    std::fill(cbar.begin(), cbar.end(), 0.0);
    std::copy(cb.begin(), cb.end(), cbar.begin());
    kcur = keff;
  }

  // ----- final eigen products -----
  if (ex.ok) {
    res.k_eff = ex.k_eff;
    DenseMatrix G = detail::realify_columns(ex.values, ex.vectors, j_dim, ex.k_eff);
    res.eigvectors.assign(n * std::size_t(ex.k_eff), 0.0);
    vo.gemm_nn(n, std::size_t(j_dim), std::size_t(ex.k_eff), V.data(),
               G.a.data(), res.eigvectors.data());
    res.eig.resize(ex.k_eff);
    // explicit final audit so reported eigen-residuals are trustworthy
    std::vector<double> w1(n), w2(n);
    res.eig_converged = 0;
    for (int c = 0; c < ex.k_eff;) {
      const bool pair = detail::is_conj_pair(ex.values, c) && c + 1 < ex.k_eff;
      const double* yr = res.eigvectors.data() + std::size_t(c) * n;
      const double a = ex.values[c].real(), bb = ex.values[c].imag();
      double num, den;
      if (pair) {
        const double* yi = res.eigvectors.data() + std::size_t(c + 1) * n;
        op.apply_audit(yr, w1.data());
        op.apply_audit(yi, w2.data());
        vo.axpy(n, -a, yr, w1.data());
        vo.axpy(n, bb, yi, w1.data());
        vo.axpy(n, -a, yi, w2.data());
        vo.axpy(n, -bb, yr, w2.data());
        num = std::hypot(vo.nrm2(n, w1.data()), vo.nrm2(n, w2.data()));
        den = std::hypot(vo.nrm2(n, yr), vo.nrm2(n, yi));
      } else {
        op.apply_audit(yr, w1.data());
        vo.axpy(n, -a, yr, w1.data());
        num = vo.nrm2(n, w1.data());
        den = vo.nrm2(n, yr);
      }
      const double explicit_rn = den > 0.0 ? num / den : 0.0;
      const double cheap = ex.estimates[c];
      const double big = std::max(explicit_rn, cheap);
      if (big > 1e-12 * (1.0 + std::abs(ex.values[c])) &&
          std::abs(explicit_rn - cheap) > 0.1 * big)
        res.audit_ok = false;
      for (int q = c; q < c + (pair ? 2 : 1); ++q) {
        res.eig[q].theta = ex.values[q];
        res.eig[q].estimate = ex.estimates[q];
        res.eig[q].resnorm = explicit_rn;
        res.eig[q].audited = true;
        if (explicit_rn <= rtolev) ++res.eig_converged;
      }
      c += pair ? 2 : 1;
    }
  }

  res.resnorm = est;
  res.status = status;
  res.trace.status = status;
  return res;
}

} // namespace tgk
