#include "dense_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tgk::detail {

bool is_conj_pair(const std::vector<std::complex<double>>& v, int i) {
  if (i < 0 || i + 1 >= static_cast<int>(v.size())) return false;
  if (v[i].imag() == 0.0) return false;
  const double scale = 1.0 + std::abs(v[i]);
  return std::abs(v[i + 1] - std::conj(v[i])) <= 1e-12 * scale;
}

std::vector<int> sort_eigs_ascending(const std::vector<std::complex<double>>& v) {
  const int n = static_cast<int>(v.size());
  // Group true partners first (they are adjacent in the raw eigensolver
  // output); sorting whole groups keeps degenerate equal-magnitude pairs from
  // interleaving.
  struct Group {
    int a, b; // b = -1 for a lone real eigenvalue
  };
  std::vector<Group> groups;
  for (int i = 0; i < n;) {
    if (is_conj_pair(v, i)) {
      int p = i, q = i + 1;
      if (v[p].imag() < 0.0) std::swap(p, q); // +imag member leads
      groups.push_back({p, q});
      i += 2;
    } else {
      groups.push_back({i, -1});
      ++i;
    }
  }
  std::sort(groups.begin(), groups.end(), [&](const Group& x, const Group& y) {
    const std::complex<double> a = v[x.a], b = v[y.a];
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    if (a.real() != b.real()) return a.real() < b.real();
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return x.a < y.a;
  });
  std::vector<int> ord;
  ord.reserve(n);
  for (const Group& g : groups) {
    ord.push_back(g.a);
    if (g.b >= 0) ord.push_back(g.b);
  }
  return ord;
}

int select_keff(const std::vector<std::complex<double>>& ordered, int k,
                int cap) {
  const int n = static_cast<int>(ordered.size());
  cap = std::min(cap, n);
  int keff = std::min(k, cap);
  if (keff > 0 && keff < n && is_conj_pair(ordered, keff - 1)) {
    if (keff + 1 <= cap) {
      ++keff; // keep the pair whole by extending
    } else {
      --keff; // no room: shrink below the pair instead
      while (keff > 0 && is_conj_pair(ordered, keff - 1)) --keff;
    }
  }
  return keff;
}

DenseMatrix realify_columns(const std::vector<std::complex<double>>& ordered_vals,
                            const std::vector<std::complex<double>>& ordered_vecs,
                            int rows, int k_eff) {
  DenseMatrix G(rows, k_eff);
  for (int j = 0; j < k_eff;) {
    const std::complex<double>* col = ordered_vecs.data() + std::size_t(j) * rows;
    if (j + 1 < k_eff && is_conj_pair(ordered_vals, j)) {
      for (int i = 0; i < rows; ++i) {
        G(i, j) = col[i].real();
        G(i, j + 1) = col[i].imag();
      }
      j += 2;
    } else {
      for (int i = 0; i < rows; ++i) G(i, j) = col[i].real();
      ++j;
    }
  }
  return G;
}

int orthonormalize_dense(int rows, int cols, double* A, double drop_tol) {
  auto col = [&](int j) { return A + std::size_t(j) * rows; };
  auto nrm = [&](const double* x) {
    double s = 0;
    for (int i = 0; i < rows; ++i) s += x[i] * x[i];
    return std::sqrt(s);
  };
  int kept = 0;
  for (int j = 0; j < cols; ++j) {
    double* w = col(j);
    if (j != kept) std::copy(w, w + rows, col(kept));
    w = col(kept);
    const double entry = nrm(w);
    for (int pass = 0; pass < 2; ++pass) {
      for (int q = 0; q < kept; ++q) {
        const double* vq = col(q);
        double d = 0;
        for (int i = 0; i < rows; ++i) d += vq[i] * w[i];
        for (int i = 0; i < rows; ++i) w[i] -= d * vq[i];
      }
    }
    const double rn = nrm(w);
    if (rn <= drop_tol * entry || rn == 0.0) continue; // dependent: drop
    for (int i = 0; i < rows; ++i) w[i] /= rn;
    ++kept;
  }
  return kept;
}

void matvec(const DenseMatrix& M, int rows, int cols, const double* x,
            double* y) {
  for (int i = 0; i < rows; ++i) y[i] = 0.0;
  for (int j = 0; j < cols; ++j) {
    const double xj = x[j];
    for (int i = 0; i < rows; ++i) y[i] += M(i, j) * xj;
  }
}

void matvec_t(const DenseMatrix& M, int rows, int cols, const double* x,
              double* y) {
  for (int j = 0; j < cols; ++j) {
    double s = 0;
    for (int i = 0; i < rows; ++i) s += M(i, j) * x[i];
    y[j] = s;
  }
}

} // namespace tgk::detail
