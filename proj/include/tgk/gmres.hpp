#pragma once
// Arnoldi-based solvers: restarted GMRES (fixed / scheduled / random cycle
// lengths), GMRES with deflated restarting and harmonic-Ritz eigenpair
// monitoring, and the eigenvector-augmented Arnoldi refinement used to polish
// transferred eigenvectors.

#include "tgk/counter.hpp"
#include "tgk/dense.hpp"
#include "tgk/trace.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace tgk {

// ---------------------------------------------------------------------------
// Restart policies
// ---------------------------------------------------------------------------

struct RestartPolicy {
  enum class Kind { fixed, schedule, random };
  Kind kind = Kind::fixed;
  int m = 30;                    // fixed
  std::vector<int> lengths;      // schedule; reused cyclically when exhausted
  int max_len = 36;              // random: lengths uniform on [1, max_len]
  std::uint64_t seed = 1;

  static RestartPolicy fixed_m(int m);
  static RestartPolicy from_schedule(std::vector<int> lengths);
  static RestartPolicy random_lengths(int max_len, std::uint64_t seed);
};

// ---------------------------------------------------------------------------
// Single cycle
// ---------------------------------------------------------------------------

// Arnoldi state exposed for recurrence-residual checks:
//   A V(:,0..j) = V(:,0..j+1) Hbar(0..j+1, 0..j)
struct ArnoldiFactorization {
  std::size_t n = 0;
  int j = 0;                // subspace dimension (basis has j+1 columns)
  std::vector<double> V;    // n x (j+1), column-major
  DenseMatrix Hbar;         // (j+1) x j
};

struct GmresCycleResult {
  std::vector<double> x;
  std::vector<double> r;   // true residual vector b - A x (reconstructed
                           // from the basis; no extra operator apply)
  double resnorm = 0.0;    // 2-norm of r per the minimal-residual estimate
  int iters = 0;           // Arnoldi steps used = operator applies this cycle
  bool breakdown = false;  // exact solution found inside the subspace
  SolveTrace trace;
};

// One GMRES(m) cycle from initial guess x0 (empty x0 = zero vector, costing
// no setup operator apply; otherwise one apply forms r0).  tol is an absolute
// residual threshold for in-cycle early exit; pass 0 to always run m steps.
// When fac is non-null the final factorization is copied out for inspection.
GmresCycleResult gmres_cycle(InstrumentedOperator& op,
                             const std::vector<double>& x0,
                             const std::vector<double>& b, int m,
                             double tol = 0.0,
                             ArnoldiFactorization* fac = nullptr);

// ---------------------------------------------------------------------------
// Restarted driver
// ---------------------------------------------------------------------------

struct GmresResult {
  std::vector<double> x;
  std::vector<double> r;
  double resnorm = 0.0;
  double r0_norm = 0.0;
  int cycles = 0;
  SolveStatus status = SolveStatus::maxit;
  SolveTrace trace;
};

// Hook run before every cycle (deflated drivers inject the projection here);
// receives the iterate, the maintained residual, the trace, and the 1-based
// index of the cycle about to run.
using PreCycleHook =
    std::function<void(std::vector<double>& x, std::vector<double>& r,
                       SolveTrace& trace, int cycle)>;

struct GmresDriverOptions {
  double rtol = 1e-10;
  std::uint64_t max_mvp = std::numeric_limits<std::uint64_t>::max();
  int max_cycles = std::numeric_limits<int>::max();
  int level = 0;                    // trace tag: 0 fine, 1 coarse
  const char* phase = "gmres";      // trace phase label for cycle events
  const PreCycleHook* pre_cycle = nullptr;
  bool early_exit = true;           // allow in-cycle exit at the final target
};

// Chains GMRES cycles per the policy until ||r|| <= rtol * ||r0|| or the
// mvp/cycle budget runs out.  The deflated driver wraps this same loop, so a
// run with no hook is trace-identical to one with an empty deflation basis.
GmresResult gmres_driver(InstrumentedOperator& op, std::vector<double> x0,
                         const std::vector<double>& b,
                         const RestartPolicy& policy,
                         const GmresDriverOptions& opt);

// Spec'd convenience form: fixed policy interface, default options.
GmresResult gmres_restarted(InstrumentedOperator& op,
                            const std::vector<double>& x0,
                            const std::vector<double>& b,
                            const RestartPolicy& policy, double rtol,
                            std::uint64_t max_mvp);

// ---------------------------------------------------------------------------
// GMRES with deflated restarting
// ---------------------------------------------------------------------------

struct EigRecord {
  std::complex<double> theta;
  double resnorm = 0.0;        // best available: explicit when audited
  double estimate = 0.0;       // cheap in-cycle estimate ||Hbar g - theta g||
  bool audited = false;        // resnorm came from an explicit recomputation
};

struct GmresDrOptions {
  int max_cycles = 1000;
  int level = 0;
  int audit_every = 10;        // explicit eigen-residual audit period (cycles)
  double stall_rtol = 1e-14;   // stagnation: no decrease over a full cycle
  // Observer called at every cycle end with the current factorization
  // (copies the basis; intended for tests on small problems).
  const std::function<void(const ArnoldiFactorization&, int cycle)>* observer =
      nullptr;
};

struct GmresDrResult {
  std::vector<double> x;
  std::vector<double> r;
  double resnorm = 0.0;
  double r0_norm = 0.0;
  int cycles = 0;
  int cycles_to_linear = 0;      // cycle index when ||r|| first met rtol
  bool linear_converged = false;
  int eig_converged = 0;         // pairs with estimate <= rtolev at exit
  int k_eff = 0;                 // retained eigenvector count (k or k+1)
  std::vector<EigRecord> eig;    // k_eff records, ascending |theta|
  std::vector<double> eigvectors; // n x k_eff; conjugate pairs stored as
                                  // adjacent (Re, Im) column pairs
  bool audit_ok = true;          // cheap estimates matched explicit audits
  SolveStatus status = SolveStatus::maxit;
  SolveTrace trace;
};

// Deflated-restart GMRES: each cycle minimizes the residual over
// span{y_1..y_k, r, A r, ...} of total dimension m, extracting harmonic Ritz
// pairs at every restart.  First cycle costs m operator applies, later ones
// m - k_eff.  Terminates when the linear system has met rtol AND nev pairs
// have eigen-residual <= rtolev, or at max_cycles; stagnation before linear
// convergence is flagged.
GmresDrResult gmres_dr(InstrumentedOperator& op, const std::vector<double>& x0,
                       const std::vector<double>& b, int m, int k, double rtol,
                       int nev, double rtolev,
                       const GmresDrOptions& opt = {});

// ---------------------------------------------------------------------------
// Eigenvector refinement (eigenvector-augmented restarted Arnoldi)
// ---------------------------------------------------------------------------

struct ArnoldiEOptions {
  int max_cycles = 50;
  int level = 0;
  double drop_tol = 1e-12;  // dependent-direction deflation threshold
};

struct ArnoldiEResult {
  int k = 0;                     // columns retained (= input k unless deflated)
  std::vector<double> vectors;   // n x k improved Ritz block; conjugate pairs
                                 // stored as adjacent (Re, Im) column pairs
                                 // (same convention as GmresDrResult)
  std::vector<double> avectors;  // n x k operator products A * vectors,
                                 // carried exactly by the recurrence (no
                                 // extra applies); lets callers seed a
                                 // deflation basis at zero operator cost
  std::vector<EigRecord> eig;    // one record per column, ascending |theta|
  int converged = 0;             // leading columns meeting rtolev (streak)
  int cycles = 0;                // improvement cycles run (0 = already good)
  SolveTrace trace;
};

// Improves k approximate eigenvectors by restarted Rayleigh-Ritz over the
// subspace spanned by the current Ritz vectors plus a Krylov extension seeded
// with the residual of the smallest not-yet-converged pair.  Stops once
// target_count pairs have residual norm <= rtolev or at max_cycles.
ArnoldiEResult arnoldi_e_improve(InstrumentedOperator& op,
                                 const std::vector<double>& V0, int k, int m,
                                 int target_count, double rtolev,
                                 const ArnoldiEOptions& opt = {});

} // namespace tgk
