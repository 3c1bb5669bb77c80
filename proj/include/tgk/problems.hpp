#pragma once
// Finite-difference model problems on the unit square with zero Dirichlet
// boundaries, lexicographic ordering (x fastest), producing matched
// fine/coarse pairs.

#include "tgk/csr.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tgk {

struct Grid2D {
  int N = 0;      // interior points per side
  double h = 0;   // mesh width, 1/(N+1)
  index_t n = 0;  // N*N unknowns

  index_t idx(int i, int j) const { return index_t(j) * N + i; } // x fastest
  double x(int i) const { return (i + 1) * h; }                  // interior coord
  double y(int j) const { return (j + 1) * h; }
};

// inv_h = 1/h must be an integer >= 2; grid has N = inv_h - 1 interior points.
Grid2D make_grid(int inv_h);

enum class ProblemFamily { convection_diffusion, helmholtz, biharmonic };

ProblemFamily family_from_string(const std::string& s); // throws on unknown
std::string family_to_string(ProblemFamily f);

struct BuiltProblem {
  Grid2D grid;
  CsrMatrix A;
  std::vector<double> rhs;
};

// -e^{5xy} (u_xx + u_yy) + 40 u_x + 40 u_y, second-order central differences,
// diffusion coefficient evaluated at the stencil center; manufactured
// right-hand side c*sin(x)cos(x)e^{xy} scaled so ||rhs||_2 = 1.
// Passing diffusion-only flags via the two optional arguments reduces the
// operator to -coef*Laplacian (used by tests against analytic eigenvalues).
BuiltProblem build_convection_diffusion(int inv_h, double convection = 40.0,
                                        bool variable_coefficient = true);

// -u_xx - u_yy - kappa^2 u with a seeded standard-normal right-hand side.
// The assembled matrix is exactly symmetric.
BuiltProblem build_helmholtz(int inv_h, double kappa, std::uint64_t seed);

// Fourth-order operator with a third-derivative convection term, assembled in
// units of h^4 so entries are O(1): the 13-point bidirectional fourth-
// difference stencil (center 20, edge neighbors -8, diagonals +2, distance-2
// neighbors +1) plus 20h*(1,-2,0,2,-1) from the third derivative along x.
// Ghost values beyond the boundary are zero; right-hand side seeded normal.
BuiltProblem build_biharmonic(int inv_h, std::uint64_t seed);

struct ProblemInstance {
  std::string label;
  ProblemFamily family = ProblemFamily::convection_diffusion;
  Grid2D fine_grid, coarse_grid;
  CsrMatrix fine_A, coarse_A;
  std::vector<double> fine_rhs, coarse_rhs;
  int nnz_per_row_nominal = 5; // flat per-row count used by the cost model
  std::uint64_t rhs_seed = 0;
  bool rhs_is_random = false;
  double kappa = 0.0;
};

// Builds both grids with the same operator family and coefficients.
// coarse_inv_h must divide fine_inv_h with a power-of-two ratio.  For the
// manufactured right-hand side the coarse rhs is the same functional form
// sampled on the coarse grid; for random right-hand sides it is the fine rhs
// restricted by injection at coincident points.
ProblemInstance make_pair(ProblemFamily family, int fine_inv_h,
                          int coarse_inv_h, std::uint64_t seed,
                          double kappa = 0.0);

} // namespace tgk
