// Unit tests for the Arnoldi-based solvers: single GMRES cycles, the
// restarted driver (fixed / scheduled / random policies), GMRES with deflated
// restarting, and the eigenvector-augmented refinement loop.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tgk/csr.hpp"
#include "tgk/counter.hpp"
#include "tgk/dense.hpp"
#include "tgk/gmres.hpp"
#include "tgk/precond.hpp"
#include "tgk/problems.hpp"
#include "tgk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <vector>

using namespace tgk;

namespace {

CsrMatrix diag_csr(const std::vector<double>& d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i)
    t.push_back({index_t(i), index_t(i), d[i]});
  return csr_from_triplets(index_t(d.size()), index_t(d.size()), std::move(t));
}

CsrMatrix tridiag_csr(int n, double lo, double di, double up) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    if (i > 0) t.push_back({index_t(i), index_t(i - 1), lo});
    t.push_back({index_t(i), index_t(i), di});
    if (i + 1 < n) t.push_back({index_t(i), index_t(i + 1), up});
  }
  return csr_from_triplets(n, n, std::move(t));
}

// Diagonally dominant random sparse matrix (same recipe as the core tests).
CsrMatrix random_csr(int n, std::uint64_t seed) {
  NormalRng rng(seed);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({index_t(i), index_t(i), 5.0 + rng() * 0.5});
    for (int k = 0; k < 3; ++k) {
      const int j = int(rng.engine()() % std::uint64_t(n));
      if (j != i) t.push_back({index_t(i), index_t(j), rng() * 0.3});
    }
  }
  return csr_from_triplets(n, n, std::move(t));
}

// Block-diagonal matrix of 2x2 scaled rotations: eigenvalues s_j e^{+-i phi}.
CsrMatrix rotation_blocks(int nblocks, double phi, double s0, double ds) {
  std::vector<Triplet> t;
  const double c = std::cos(phi), s = std::sin(phi);
  for (int j = 0; j < nblocks; ++j) {
    const double sc = s0 + ds * j;
    const index_t a = 2 * j, b = 2 * j + 1;
    t.push_back({a, a, sc * c});
    t.push_back({a, b, -sc * s});
    t.push_back({b, a, sc * s});
    t.push_back({b, b, sc * c});
  }
  return csr_from_triplets(2 * nblocks, 2 * nblocks, std::move(t));
}

std::vector<double> residual_of(const CsrMatrix& A, const std::vector<double>& x,
                                const std::vector<double>& b) {
  std::vector<double> ax = spmv(A, x), r(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - ax[i];
  return r;
}

double nrm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// ||A V_j - V_{j+1} Hbar||_F / ||Hbar||_F for an exposed factorization.
double arnoldi_relation_err(const CsrMatrix& A, const ArnoldiFactorization& f) {
  const std::size_t n = f.n;
  const int j = f.j;
  double num2 = 0, den2 = 0;
  std::vector<double> av(n);
  for (int c = 0; c < j; ++c) {
    spmv(A, f.V.data() + std::size_t(c) * n, av.data());
    for (std::size_t i = 0; i < n; ++i) {
      double t = av[i];
      for (int q = 0; q <= j; ++q)
        t -= f.V[std::size_t(q) * n + i] * f.Hbar(q, c);
      num2 += t * t;
    }
  }
  for (int c = 0; c < j; ++c)
    for (int q = 0; q <= j; ++q) den2 += f.Hbar(q, c) * f.Hbar(q, c);
  return std::sqrt(num2 / den2);
}

double basis_orthonormality_err(const ArnoldiFactorization& f) {
  const std::size_t n = f.n;
  const int cols = f.j + 1;
  double worst = 0;
  for (int a = 0; a < cols; ++a)
    for (int b = a; b < cols; ++b) {
      double d = 0;
      for (std::size_t i = 0; i < n; ++i)
        d += f.V[std::size_t(a) * n + i] * f.V[std::size_t(b) * n + i];
      worst = std::max(worst, std::abs(d - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

DenseMatrix dense_from_csr(const CsrMatrix& A) {
  DenseMatrix D(A.nrows, A.ncols);
  for (index_t i = 0; i < A.nrows; ++i)
    for (index_t p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
      D(i, A.col_idx[p]) += A.values[p];
  return D;
}

bool traces_equal(const SolveTrace& a, const SolveTrace& b) {
  if (a.events.size() != b.events.size() || a.status != b.status) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    const TraceEvent &x = a.events[i], &y = b.events[i];
    if (x.phase != y.phase || x.cycle != y.cycle || x.level != y.level ||
        x.mvp != y.mvp || x.prec != y.prec || x.vops != y.vops ||
        x.audit_mvp != y.audit_mvp ||
        std::memcmp(&x.resnorm, &y.resnorm, sizeof(double)) != 0)
      return false;
  }
  return true;
}

} // namespace

// ---------------------------------------------------------------------------
// Single GMRES cycle
// ---------------------------------------------------------------------------

TEST_CASE("gmres_cycle on the identity solves in one step") {
  const int n = 20;
  CsrMatrix A = diag_csr(std::vector<double>(n, 1.0));
  OpCounter cnt;
  InstrumentedOperator op(A, cnt);
  std::vector<double> b = normal_vector(n, 11);

  GmresCycleResult out = gmres_cycle(op, {}, b, 5);
  CHECK(out.iters == 1);
  CHECK(out.breakdown);
  CHECK(out.resnorm <= 1e-14 * nrm(b));
  for (int i = 0; i < n; ++i) CHECK(out.x[i] == doctest::Approx(b[i]).epsilon(1e-14));
  CHECK(cnt.mvp == 1); // zero initial guess costs no setup apply
}

TEST_CASE("full-space gmres_cycle matches the dense direct solve") {
  const int n = 25;
  CsrMatrix A = random_csr(n, 3);
  std::vector<double> b = normal_vector(n, 4);
  OpCounter cnt;
  InstrumentedOperator op(A, cnt);

  ArnoldiFactorization fac;
  GmresCycleResult out = gmres_cycle(op, {}, b, n, 0.0, &fac);
  std::vector<double> xd = dense_solve(dense_from_csr(A), b);
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    num += (out.x[i] - xd[i]) * (out.x[i] - xd[i]);
    den += xd[i] * xd[i];
  }
  CHECK(std::sqrt(num / den) <= 1e-10);
  CHECK(nrm(residual_of(A, out.x, b)) <= 1e-10 * nrm(b));

  // exposed factorization satisfies the recurrence and stays orthonormal
  CHECK(arnoldi_relation_err(A, fac) <= 1e-10);
  CHECK(basis_orthonormality_err(fac) <= 1e-10);
}

TEST_CASE("gmres_cycle setup apply accounting and early exit") {
  const int n = 64;
  CsrMatrix A = random_csr(n, 9);
  std::vector<double> b = normal_vector(n, 10);

  OpCounter c1;
  InstrumentedOperator op1(A, c1);
  GmresCycleResult full = gmres_cycle(op1, {}, b, 12);
  CHECK(c1.mvp == 12); // exactly min(m, steps) applies, no setup apply

  OpCounter c2;
  InstrumentedOperator op2(A, c2);
  std::vector<double> x0 = normal_vector(n, 12);
  GmresCycleResult g2 = gmres_cycle(op2, x0, b, 12);
  CHECK(c2.mvp == 13); // one extra apply to form b - A x0
  CHECK(g2.iters == 12);

  // absolute tolerance triggers an in-cycle exit
  OpCounter c3;
  InstrumentedOperator op3(A, c3);
  const double tol = 0.2 * nrm(b);
  GmresCycleResult g3 = gmres_cycle(op3, {}, b, 12, tol);
  CHECK(g3.resnorm <= tol);
  CHECK(g3.iters < 12);
  CHECK(g3.trace.status == SolveStatus::converged);
}

TEST_CASE("minimal-residual estimate is nonincreasing in the cycle length") {
  const int n = 60;
  CsrMatrix A = random_csr(n, 21);
  std::vector<double> b = normal_vector(n, 22);
  double prev = nrm(b);
  for (int m = 1; m <= 12; ++m) {
    OpCounter cnt;
    InstrumentedOperator op(A, cnt);
    GmresCycleResult out = gmres_cycle(op, {}, b, m);
    CHECK(out.resnorm <= prev * (1.0 + 1e-14));
    prev = out.resnorm;

    // reconstructed residual vector agrees with the recurrence estimate and
    // with the explicitly recomputed true residual
    CHECK(nrm(out.r) == doctest::Approx(out.resnorm).epsilon(1e-10));
    CHECK(nrm(residual_of(A, out.x, b)) ==
          doctest::Approx(out.resnorm).epsilon(1e-8));
  }
}

// ---------------------------------------------------------------------------
// Restarted driver
// ---------------------------------------------------------------------------

TEST_CASE("restarted gmres converges and traces per-cycle counters") {
  BuiltProblem p = build_convection_diffusion(16); // n = 225
  OpCounter cnt;
  InstrumentedOperator op(p.A, cnt);

  GmresResult res = gmres_restarted(op, {}, p.rhs, RestartPolicy::fixed_m(30),
                                    1e-8, 200000);
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.resnorm <= 1e-8 * res.r0_norm);
  CHECK(nrm(residual_of(p.A, res.x, p.rhs)) <= 1e-7 * res.r0_norm);

  REQUIRE(!res.trace.events.empty());
  CHECK(res.trace.events.front().phase == "setup");
  CHECK(res.trace.events.front().cycle == 0);
  std::uint64_t prev_mvp = res.trace.events.front().mvp;
  for (std::size_t i = 1; i < res.trace.events.size(); ++i) {
    const TraceEvent& e = res.trace.events[i];
    CHECK(e.phase == "gmres");
    CHECK(e.cycle == int(i));
    const std::uint64_t delta = e.mvp - prev_mvp;
    CHECK(delta <= 30);
    CHECK(delta >= 1);
    if (i + 1 < res.trace.events.size()) CHECK(delta == 30);
    prev_mvp = e.mvp;
  }
  CHECK(res.cycles == int(res.trace.events.size()) - 1);
}

TEST_CASE("ilu-preconditioned composite operator solves the original system") {
  BuiltProblem p = build_convection_diffusion(16);
  Ilu0Factors F = ilu0_factor(p.A, 0.0);
  OpCounter plain_cnt, prec_cnt;
  InstrumentedOperator plain(p.A, plain_cnt);
  InstrumentedOperator prec(p.A, &F, prec_cnt);

  GmresResult res_plain =
      gmres_restarted(plain, {}, p.rhs, RestartPolicy::fixed_m(30), 1e-8, 200000);
  GmresResult res_prec =
      gmres_restarted(prec, {}, p.rhs, RestartPolicy::fixed_m(30), 1e-8, 200000);
  CHECK(res_prec.status == SolveStatus::converged);
  CHECK(prec_cnt.prec == prec_cnt.mvp); // every apply is preconditioned
  CHECK(prec_cnt.mvp < plain_cnt.mvp);  // preconditioning must pay off here

  // right-preconditioned split: the driver solves (A M^-1) z = b, so the
  // original-system iterate is x = M^-1 z with the same residual vector
  std::vector<double> x(p.A.nrows);
  apply_prec(F, res_prec.x.data(), x.data());
  CHECK(nrm(residual_of(p.A, x, p.rhs)) <= 1e-7 * res_prec.r0_norm);
}

TEST_CASE("restart schedule cycles through its lengths") {
  BuiltProblem p = build_convection_diffusion(16);
  OpCounter cnt;
  InstrumentedOperator op(p.A, cnt);
  GmresDriverOptions opt;
  opt.rtol = 1e-30; // never met: we only watch the cycle lengths
  opt.max_cycles = 7;
  opt.early_exit = false;
  GmresResult res =
      gmres_driver(op, {}, p.rhs, RestartPolicy::from_schedule({5, 9, 14}), opt);
  CHECK(res.status == SolveStatus::maxit);
  REQUIRE(res.trace.events.size() == 8);
  const int want[7] = {5, 9, 14, 5, 9, 14, 5};
  for (int i = 0; i < 7; ++i) {
    const std::uint64_t delta =
        res.trace.events[i + 1].mvp - res.trace.events[i].mvp;
    CHECK(delta == std::uint64_t(want[i]));
  }
}

TEST_CASE("random restart lengths are reproducible and bounded") {
  BuiltProblem p = build_convection_diffusion(16);
  auto run = [&](std::uint64_t seed) {
    OpCounter cnt;
    InstrumentedOperator op(p.A, cnt);
    GmresDriverOptions opt;
    opt.rtol = 1e-8;
    opt.max_cycles = 40;
    return gmres_driver(op, {}, p.rhs, RestartPolicy::random_lengths(36, seed),
                        opt);
  };
  GmresResult a = run(7), b = run(7);
  CHECK(traces_equal(a.trace, b.trace));
  CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
  for (std::size_t i = 1; i < a.trace.events.size(); ++i) {
    const std::uint64_t delta = a.trace.events[i].mvp - a.trace.events[i - 1].mvp;
    CHECK(delta >= 1);
    CHECK(delta <= 36);
  }
}

TEST_CASE("residual carries across restarts bitwise") {
  const int n = 120;
  CsrMatrix A = tridiag_csr(n, -1.0, 2.4, -1.2);
  std::vector<double> b = normal_vector(n, 31);
  const RestartPolicy pol = RestartPolicy::fixed_m(8);

  std::map<int, std::vector<double>> at_cycle_start;
  PreCycleHook hook = [&](std::vector<double>&, std::vector<double>& r,
                          SolveTrace&, int cycle) { at_cycle_start[cycle] = r; };
  GmresDriverOptions opt;
  opt.rtol = 1e-9;
  opt.pre_cycle = &hook;
  OpCounter cnt;
  InstrumentedOperator op(A, cnt);
  GmresResult full = gmres_driver(op, {}, b, pol, opt);
  CHECK(full.status == SolveStatus::converged);
  REQUIRE(full.cycles >= 3);

  for (int c = 1; c + 1 <= full.cycles; ++c) {
    OpCounter cnt2;
    InstrumentedOperator op2(A, cnt2);
    GmresDriverOptions opt2;
    opt2.rtol = 1e-9;
    opt2.max_cycles = c;
    GmresResult part = gmres_driver(op2, {}, b, pol, opt2);
    REQUIRE(at_cycle_start.count(c + 1) == 1);
    const std::vector<double>& expect = at_cycle_start[c + 1];
    CHECK(std::memcmp(part.r.data(), expect.data(), n * sizeof(double)) == 0);
  }
}

// ---------------------------------------------------------------------------
// GMRES with deflated restarting
// ---------------------------------------------------------------------------

TEST_CASE("deflated restart on diag(1..10): one exact cycle, exact harmonic values") {
  std::vector<double> d(10);
  for (int i = 0; i < 10; ++i) d[i] = i + 1.0;
  CsrMatrix A = diag_csr(d);
  std::vector<double> b = normal_vector(10, 17);
  OpCounter cnt;
  InstrumentedOperator op(A, cnt);

  GmresDrResult res = gmres_dr(op, {}, b, 10, 3, 1e-10, 3, 1e-8);
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.cycles == 1);
  CHECK(res.linear_converged);
  CHECK(res.cycles_to_linear == 1);
  CHECK(cnt.mvp == 10);
  CHECK(nrm(residual_of(A, res.x, b)) <= 1e-9 * res.r0_norm);

  REQUIRE(res.k_eff == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(res.eig[i].theta.imag() == 0.0);
    CHECK(res.eig[i].theta.real() == doctest::Approx(i + 1.0).epsilon(1e-10));
    CHECK(res.eig[i].resnorm <= 1e-10);
    CHECK(res.eig[i].audited);
  }
  CHECK(res.audit_ok);

  // reported eigenvector products check out against a raw recomputation
  for (int i = 0; i < 3; ++i) {
    const double* y = res.eigvectors.data() + std::size_t(i) * 10;
    std::vector<double> yv(y, y + 10), ay = spmv(A, yv);
    double num = 0, den = 0;
    for (int q = 0; q < 10; ++q) {
      const double t = ay[q] - res.eig[i].theta.real() * yv[q];
      num += t * t;
      den += yv[q] * yv[q];
    }
    CHECK(std::sqrt(num / den) <= 1e-10);
  }
}

TEST_CASE("deflated restart invariants: recurrence, counts, monotone residual") {
  BuiltProblem p = build_convection_diffusion(16, 0.0, false); // symmetric
  const int m = 20, k = 5;
  OpCounter cnt;
  InstrumentedOperator op(p.A, cnt);

  std::vector<double> relation_errs, ortho_errs;
  std::vector<std::uint64_t> mvp_at_cycle;
  std::function<void(const ArnoldiFactorization&, int)> obs =
      [&](const ArnoldiFactorization& fac, int) {
        relation_errs.push_back(arnoldi_relation_err(p.A, fac));
        ortho_errs.push_back(basis_orthonormality_err(fac));
        mvp_at_cycle.push_back(cnt.mvp);
      };
  GmresDrOptions opt;
  opt.observer = &obs;
  GmresDrResult res = gmres_dr(op, {}, p.rhs, m, k, 1e-10, 0, 1e-8, opt);

  CHECK(res.status == SolveStatus::converged);
  REQUIRE(res.cycles >= 3);
  for (double e : relation_errs) CHECK(e <= 1e-10);
  for (double e : ortho_errs) CHECK(e <= 1e-10);

  // exact apply counts: m on the first cycle, m-k on every later one
  REQUIRE(mvp_at_cycle.size() >= 3);
  CHECK(mvp_at_cycle[0] == std::uint64_t(m));
  for (std::size_t i = 1; i < mvp_at_cycle.size(); ++i)
    CHECK(mvp_at_cycle[i] - mvp_at_cycle[i - 1] == std::uint64_t(m - k));

  // end-of-cycle residual never grows
  double prev = res.r0_norm;
  for (const TraceEvent& e : res.trace.events)
    if (e.phase == "gmres-dr") {
      CHECK(e.resnorm <= prev * (1.0 + 1e-12));
      prev = e.resnorm;
    }
  CHECK(nrm(residual_of(p.A, res.x, p.rhs)) <= 1e-9 * res.r0_norm);
}

TEST_CASE("converged harmonic pairs match dense eigenvalues") {
  BuiltProblem p = build_convection_diffusion(12); // n = 121, nonsymmetric
  OpCounter cnt;
  InstrumentedOperator op(p.A, cnt);
  GmresDrResult res = gmres_dr(op, {}, p.rhs, 30, 10, 1e-12, 6, 1e-9);
  CHECK(res.linear_converged);
  CHECK(res.eig_converged >= 6);
  CHECK(res.audit_ok);

  EigResult dense = dense_eig(dense_from_csr(p.A));
  int checked = 0;
  for (const EigRecord& rec : res.eig) {
    if (rec.resnorm > 1e-8) continue;
    double best = 1e300;
    for (const std::complex<double>& lam : dense.values)
      best = std::min(best, std::abs(rec.theta - lam));
    CHECK(best <= 1e-6 * (1.0 + std::abs(rec.theta)));
    ++checked;
  }
  CHECK(checked >= 6);
}

TEST_CASE("deflated restart is deterministic") {
  BuiltProblem p = build_convection_diffusion(12);
  auto run = [&] {
    OpCounter cnt;
    InstrumentedOperator op(p.A, cnt);
    return gmres_dr(op, {}, p.rhs, 25, 8, 1e-10, 4, 1e-8);
  };
  GmresDrResult a = run(), b = run();
  CHECK(traces_equal(a.trace, b.trace));
  CHECK(a.x.size() == b.x.size());
  CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.eigvectors.data(), b.eigvectors.data(),
                    a.eigvectors.size() * sizeof(double)) == 0);
}

TEST_CASE("deflated restart flags stagnation on a circulant shift") {
  const int n = 50;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) t.push_back({index_t(i), index_t((i + 1) % n), 1.0});
  CsrMatrix A = csr_from_triplets(n, n, std::move(t));
  std::vector<double> b(n, 0.0);
  b[0] = 1.0;
  OpCounter cnt;
  InstrumentedOperator op(A, cnt);
  GmresDrResult res = gmres_dr(op, {}, b, 5, 2, 1e-10, 0, 1e-8);
  CHECK(res.status == SolveStatus::stagnated);
  CHECK(!res.linear_converged);
}

// ---------------------------------------------------------------------------
// Eigenvector-augmented refinement
// ---------------------------------------------------------------------------

TEST_CASE("refinement is a fixed point on exact eigenvectors") {
  const int n = 30, k = 4;
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = 0.1 * (i + 1); // ||A|| = 3
  CsrMatrix A = diag_csr(d);
  OpCounter cnt;
  InstrumentedOperator op(A, cnt);

  std::vector<double> V0(std::size_t(n) * k, 0.0);
  for (int c = 0; c < k; ++c) V0[std::size_t(c) * n + c] = 1.0; // e_1..e_4
  ArnoldiEResult res = arnoldi_e_improve(op, V0, k, 10, k, 1e-12);

  CHECK(res.cycles == 0);
  CHECK(res.k == k);
  CHECK(res.converged == k);
  CHECK(cnt.mvp == std::uint64_t(k)); // entry products only
  REQUIRE(int(res.eig.size()) == k);
  for (int i = 0; i < k; ++i) {
    CHECK(res.eig[i].resnorm <= 1e-12);
    CHECK(res.eig[i].theta.real() == doctest::Approx(0.1 * (i + 1)).epsilon(1e-12));
    CHECK(res.eig[i].audited);
  }
  CHECK(res.trace.status == SolveStatus::converged);
}

TEST_CASE("refinement improves perturbed eigenvectors of a tridiagonal matrix") {
  const int n = 100, k = 5, m = 25;
  CsrMatrix A = tridiag_csr(n, -1.0, 2.0, -1.0);
  const double pi = 3.14159265358979323846;
  auto lam = [&](int j) { return 2.0 - 2.0 * std::cos(j * pi / (n + 1.0)); };

  std::vector<double> V0(std::size_t(n) * k);
  NormalRng noise(5);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < n; ++i)
      V0[std::size_t(c) * n + i] =
          std::sin((i + 1.0) * (c + 1.0) * pi / (n + 1.0)) + 1e-2 * noise();

  OpCounter cnt;
  InstrumentedOperator op(A, cnt);
  ArnoldiEResult res = arnoldi_e_improve(op, V0, k, m, k, 1e-8);

  CHECK(res.trace.status == SolveStatus::converged);
  CHECK(res.cycles >= 1);
  CHECK(res.converged == k);
  CHECK(res.k == k);
  // exact apply accounting: k entry products, then m-k per cycle
  CHECK(cnt.mvp == std::uint64_t(k) + std::uint64_t(res.cycles) * (m - k));

  // targeted-pair residual maximum never grows across cycles
  double prev = 1e300;
  for (const TraceEvent& e : res.trace.events)
    if (e.phase == "arnoldi-e") {
      CHECK(e.resnorm <= prev * (1.0 + 1e-9));
      prev = e.resnorm;
    }

  // values land on the analytic spectrum, ascending
  for (int i = 0; i < k; ++i) {
    CHECK(res.eig[i].theta.imag() == 0.0);
    CHECK(std::abs(res.eig[i].theta.real() - lam(i + 1)) <= 1e-6);
  }

  // carried products are the exact operator images of the output block
  for (int c = 0; c < res.k; ++c) {
    std::vector<double> y(res.vectors.begin() + std::size_t(c) * n,
                          res.vectors.begin() + std::size_t(c + 1) * n);
    std::vector<double> ay = spmv(A, y);
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
      const double t = ay[i] - res.avectors[std::size_t(c) * n + i];
      num += t * t;
      den += ay[i] * ay[i];
    }
    CHECK(std::sqrt(num / std::max(den, 1e-300)) <= 1e-10);
  }
}

TEST_CASE("refinement keeps conjugate pairs whole") {
  CsrMatrix A = rotation_blocks(20, 0.7, 1.0, 0.5); // n = 40
  const double c0 = std::cos(0.7), s0 = std::sin(0.7);

  SUBCASE("exact invariant pair block is a fixed point") {
    const int k = 4;
    std::vector<double> V0(40 * std::size_t(k), 0.0);
    for (int c = 0; c < k; ++c) V0[std::size_t(c) * 40 + c] = 1.0;
    OpCounter cnt;
    InstrumentedOperator op(A, cnt);
    ArnoldiEResult res = arnoldi_e_improve(op, V0, k, 12, k, 1e-10);
    CHECK(res.cycles == 0);
    CHECK(res.converged == k);
    REQUIRE(res.k == k);
    // two conjugate pairs, +imag first, moduli 1.0 and 1.5
    CHECK(res.eig[0].theta.real() == doctest::Approx(c0).epsilon(1e-10));
    CHECK(res.eig[0].theta.imag() == doctest::Approx(s0).epsilon(1e-10));
    CHECK(res.eig[1].theta == std::conj(res.eig[0].theta));
    CHECK(res.eig[2].theta.real() == doctest::Approx(1.5 * c0).epsilon(1e-10));
    CHECK(res.eig[3].theta == std::conj(res.eig[2].theta));
  }

  SUBCASE("a block boundary inside a pair grows the block by one") {
    const int k = 3; // spans pair 0 and half of pair 1
    std::vector<double> V0(40 * std::size_t(k), 0.0);
    for (int c = 0; c < k; ++c) V0[std::size_t(c) * 40 + c] = 1.0;
    OpCounter cnt;
    InstrumentedOperator op(A, cnt);
    ArnoldiEResult res = arnoldi_e_improve(op, V0, k, 12, k, 1e-10);
    CHECK(res.k == 4); // extended to keep the second pair whole
    CHECK(res.converged >= 3);
    CHECK(res.eig[1].theta == std::conj(res.eig[0].theta));
    CHECK(res.eig[3].theta == std::conj(res.eig[2].theta));
  }
}

TEST_CASE("refinement deflates dependent input columns") {
  const int n = 30;
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = 1.0 + i;
  CsrMatrix A = diag_csr(d);
  std::vector<double> V0(std::size_t(n) * 3, 0.0);
  V0[0] = 1.0;            // e_1
  V0[n + 0] = 1.0;        // e_1 again (dependent)
  V0[2 * n + 1] = 1.0;    // e_2
  OpCounter cnt;
  InstrumentedOperator op(A, cnt);
  ArnoldiEResult res = arnoldi_e_improve(op, V0, 3, 10, 3, 1e-10);
  CHECK(res.k == 2);
  CHECK(res.converged == 2);
  CHECK(cnt.mvp == 2); // products only for the surviving columns
}
