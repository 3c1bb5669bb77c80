#include "tgk/problems.hpp"

#include "tgk/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace tgk {

Grid2D make_grid(int inv_h) {
  if (inv_h < 2) throw std::invalid_argument("make_grid: 1/h must be >= 2");
  Grid2D g;
  g.N = inv_h - 1;
  g.h = 1.0 / inv_h;
  g.n = index_t(g.N) * g.N;
  return g;
}

ProblemFamily family_from_string(const std::string& s) {
  if (s == "convection-diffusion" || s == "convdiff" || s == "cd")
    return ProblemFamily::convection_diffusion;
  if (s == "helmholtz") return ProblemFamily::helmholtz;
  if (s == "biharmonic") return ProblemFamily::biharmonic;
  throw std::invalid_argument("unknown problem family: " + s);
}

std::string family_to_string(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::convection_diffusion: return "convection-diffusion";
    case ProblemFamily::helmholtz: return "helmholtz";
    case ProblemFamily::biharmonic: return "biharmonic";
  }
  return "?";
}

BuiltProblem build_convection_diffusion(int inv_h, double convection,
                                        bool variable_coefficient) {
  BuiltProblem P;
  P.grid = make_grid(inv_h);
  const Grid2D& g = P.grid;
  const double h = g.h;
  const double ih2 = 1.0 / (h * h);
  const double iv2h = convection / (2.0 * h);

  std::vector<Triplet> t;
  t.reserve(std::size_t(g.n) * 5);
  P.rhs.resize(g.n);
  double rhs_norm2 = 0;
  for (int j = 0; j < g.N; ++j)
    for (int i = 0; i < g.N; ++i) {
      const double x = g.x(i), y = g.y(j);
      const double c = variable_coefficient ? std::exp(5.0 * x * y) : 1.0;
      const index_t row = g.idx(i, j);
      if (j > 0) t.push_back({row, g.idx(i, j - 1), -c * ih2 - iv2h});
      if (i > 0) t.push_back({row, g.idx(i - 1, j), -c * ih2 - iv2h});
      t.push_back({row, row, 4.0 * c * ih2});
      if (i + 1 < g.N) t.push_back({row, g.idx(i + 1, j), -c * ih2 + iv2h});
      if (j + 1 < g.N) t.push_back({row, g.idx(i, j + 1), -c * ih2 + iv2h});
      const double f = std::sin(x) * std::cos(x) * std::exp(x * y);
      P.rhs[row] = f;
      rhs_norm2 += f * f;
    }
  const double scale = 1.0 / std::sqrt(rhs_norm2);
  for (double& v : P.rhs) v *= scale;
  P.A = csr_from_triplets(g.n, g.n, std::move(t));
  return P;
}

BuiltProblem build_helmholtz(int inv_h, double kappa, std::uint64_t seed) {
  if (kappa < 0) throw std::invalid_argument("build_helmholtz: kappa < 0");
  BuiltProblem P;
  P.grid = make_grid(inv_h);
  const Grid2D& g = P.grid;
  const double ih2 = 1.0 / (g.h * g.h);
  const double diag = 4.0 * ih2 - kappa * kappa;

  std::vector<Triplet> t;
  t.reserve(std::size_t(g.n) * 5);
  for (int j = 0; j < g.N; ++j)
    for (int i = 0; i < g.N; ++i) {
      const index_t row = g.idx(i, j);
      if (j > 0) t.push_back({row, g.idx(i, j - 1), -ih2});
      if (i > 0) t.push_back({row, g.idx(i - 1, j), -ih2});
      t.push_back({row, row, diag});
      if (i + 1 < g.N) t.push_back({row, g.idx(i + 1, j), -ih2});
      if (j + 1 < g.N) t.push_back({row, g.idx(i, j + 1), -ih2});
    }
  P.A = csr_from_triplets(g.n, g.n, std::move(t));
  P.rhs = normal_vector(g.n, seed);
  return P;
}

BuiltProblem build_biharmonic(int inv_h, std::uint64_t seed) {
  if (inv_h < 4)
    throw std::invalid_argument("build_biharmonic: 1/h must be >= 4");
  BuiltProblem P;
  P.grid = make_grid(inv_h);
  const Grid2D& g = P.grid;
  const double h = g.h;

  // Assembled in units of h^4 (entries O(1)); a global scaling leaves all
  // relative-residual convergence behavior unchanged and keeps the ILU
  // diagonal shift meaningful.
  std::vector<Triplet> t;
  t.reserve(std::size_t(g.n) * 13);
  auto add = [&](index_t row, int i, int j, double v) {
    if (i >= 0 && i < g.N && j >= 0 && j < g.N) // zero ghost values outside
      t.push_back({row, g.idx(i, j), v});
  };
  for (int j = 0; j < g.N; ++j)
    for (int i = 0; i < g.N; ++i) {
      const index_t row = g.idx(i, j);
      add(row, i, j, 20.0);
      // x-line: fourth difference plus the third-derivative term
      add(row, i - 2, j, 1.0 + 20.0 * h);
      add(row, i - 1, j, -8.0 - 40.0 * h);
      add(row, i + 1, j, -8.0 + 40.0 * h);
      add(row, i + 2, j, 1.0 - 20.0 * h);
      // y-line
      add(row, i, j - 2, 1.0);
      add(row, i, j - 1, -8.0);
      add(row, i, j + 1, -8.0);
      add(row, i, j + 2, 1.0);
      // mixed-term diagonals
      add(row, i - 1, j - 1, 2.0);
      add(row, i + 1, j - 1, 2.0);
      add(row, i - 1, j + 1, 2.0);
      add(row, i + 1, j + 1, 2.0);
    }
  P.A = csr_from_triplets(g.n, g.n, std::move(t));
  P.rhs = normal_vector(g.n, seed);
  return P;
}

ProblemInstance make_pair(ProblemFamily family, int fine_inv_h,
                          int coarse_inv_h, std::uint64_t seed, double kappa) {
  if (coarse_inv_h <= 0 || fine_inv_h % coarse_inv_h != 0)
    throw std::invalid_argument("make_pair: coarse mesh must nest in fine mesh");
  const int ratio = fine_inv_h / coarse_inv_h;
  if (ratio < 2 || (ratio & (ratio - 1)) != 0)
    throw std::invalid_argument(
        "make_pair: mesh ratio must be a power of two >= 2");

  ProblemInstance P;
  P.family = family;
  P.rhs_seed = seed;
  P.kappa = kappa;
  BuiltProblem fine, coarse;
  switch (family) {
    case ProblemFamily::convection_diffusion:
      fine = build_convection_diffusion(fine_inv_h);
      coarse = build_convection_diffusion(coarse_inv_h);
      P.nnz_per_row_nominal = 5;
      P.rhs_is_random = false;
      break;
    case ProblemFamily::helmholtz:
      fine = build_helmholtz(fine_inv_h, kappa, seed);
      coarse = build_helmholtz(coarse_inv_h, kappa, seed);
      P.nnz_per_row_nominal = 5;
      P.rhs_is_random = true;
      break;
    case ProblemFamily::biharmonic:
      fine = build_biharmonic(fine_inv_h, seed);
      coarse = build_biharmonic(coarse_inv_h, seed);
      P.nnz_per_row_nominal = 13;
      P.rhs_is_random = true;
      break;
  }
  P.fine_grid = fine.grid;
  P.coarse_grid = coarse.grid;
  P.fine_A = std::move(fine.A);
  P.coarse_A = std::move(coarse.A);
  P.fine_rhs = std::move(fine.rhs);
  if (P.rhs_is_random) {
    // Restrict the fine rhs by injection at coincident grid points.
    P.coarse_rhs.resize(P.coarse_grid.n);
    for (int jc = 0; jc < P.coarse_grid.N; ++jc)
      for (int ic = 0; ic < P.coarse_grid.N; ++ic) {
        const int fi = (ic + 1) * ratio - 1;
        const int fj = (jc + 1) * ratio - 1;
        P.coarse_rhs[P.coarse_grid.idx(ic, jc)] =
            P.fine_rhs[P.fine_grid.idx(fi, fj)];
      }
  } else {
    P.coarse_rhs = std::move(coarse.rhs);
  }
  P.label = family_to_string(family) + " 1/" + std::to_string(fine_inv_h) +
            " -> 1/" + std::to_string(coarse_inv_h);
  return P;
}

} // namespace tgk
