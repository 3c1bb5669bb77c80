// Runtime backend selection for the kernel layer.  The table is resolved once
// (first call or explicit force_isa) and is not thread-safe to re-point while
// kernels are in flight; in practice force_isa is used at process start or in
// single-threaded tests.

#include "tgk/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace tgk::kernels {

namespace detail::scalar {
double dot(std::size_t, const double*, const double*);
double nrm2(std::size_t, const double*);
void axpy(std::size_t, double, const double*, double*);
void axpby(std::size_t, double, const double*, double, const double*, double*);
void scal(std::size_t, double, double*);
void copy_scaled(std::size_t, double, const double*, double*);
double axpy_dot(std::size_t, double, const double*, double*, const double*);
void spmv_csr(index_t, const index_t*, const index_t*, const double*,
              const double*, double*);
void gemv_t(std::size_t, std::size_t, const double*, const double*, double*);
void gemv_n(std::size_t, std::size_t, const double*, const double*, double*);
void gemm_nn(std::size_t, std::size_t, std::size_t, const double*,
             const double*, double*);
void gemm_tn(std::size_t, std::size_t, std::size_t, const double*,
             const double*, double*);
} // namespace detail::scalar

#ifdef TGK_HAVE_AVX2
namespace detail::avx2 {
double dot(std::size_t, const double*, const double*);
double nrm2(std::size_t, const double*);
void axpy(std::size_t, double, const double*, double*);
void axpby(std::size_t, double, const double*, double, const double*, double*);
void scal(std::size_t, double, double*);
void copy_scaled(std::size_t, double, const double*, double*);
double axpy_dot(std::size_t, double, const double*, double*, const double*);
void spmv_csr(index_t, const index_t*, const index_t*, const double*,
              const double*, double*);
void gemv_t(std::size_t, std::size_t, const double*, const double*, double*);
void gemv_n(std::size_t, std::size_t, const double*, const double*, double*);
void gemm_nn(std::size_t, std::size_t, std::size_t, const double*,
             const double*, double*);
void gemm_tn(std::size_t, std::size_t, std::size_t, const double*,
             const double*, double*);
} // namespace detail::avx2
#endif

namespace {

struct KernelTable {
  const char* name;
  double (*dot)(std::size_t, const double*, const double*);
  double (*nrm2)(std::size_t, const double*);
  void (*axpy)(std::size_t, double, const double*, double*);
  void (*axpby)(std::size_t, double, const double*, double, const double*, double*);
  void (*scal)(std::size_t, double, double*);
  void (*copy_scaled)(std::size_t, double, const double*, double*);
  double (*axpy_dot)(std::size_t, double, const double*, double*, const double*);
  void (*spmv_csr)(index_t, const index_t*, const index_t*, const double*,
                   const double*, double*);
  void (*gemv_t)(std::size_t, std::size_t, const double*, const double*, double*);
  void (*gemv_n)(std::size_t, std::size_t, const double*, const double*, double*);
  void (*gemm_nn)(std::size_t, std::size_t, std::size_t, const double*,
                  const double*, double*);
  void (*gemm_tn)(std::size_t, std::size_t, std::size_t, const double*,
                  const double*, double*);
};

constexpr KernelTable kScalarTable = {
    "scalar",
    detail::scalar::dot,
    detail::scalar::nrm2,
    detail::scalar::axpy,
    detail::scalar::axpby,
    detail::scalar::scal,
    detail::scalar::copy_scaled,
    detail::scalar::axpy_dot,
    detail::scalar::spmv_csr,
    detail::scalar::gemv_t,
    detail::scalar::gemv_n,
    detail::scalar::gemm_nn,
    detail::scalar::gemm_tn,
};

#ifdef TGK_HAVE_AVX2
constexpr KernelTable kAvx2Table = {
    "avx2",
    detail::avx2::dot,
    detail::avx2::nrm2,
    detail::avx2::axpy,
    detail::avx2::axpby,
    detail::avx2::scal,
    detail::avx2::copy_scaled,
    detail::avx2::axpy_dot,
    detail::avx2::spmv_csr,
    detail::avx2::gemv_t,
    detail::avx2::gemv_n,
    detail::avx2::gemm_nn,
    detail::avx2::gemm_tn,
};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}
#endif

const KernelTable* pick_table(const char* request) {
#ifdef TGK_HAVE_AVX2
  if (request && std::strcmp(request, "avx2") == 0)
    return cpu_has_avx2() ? &kAvx2Table : nullptr;
  if (request && std::strcmp(request, "scalar") == 0) return &kScalarTable;
  if (request) return nullptr;
  return cpu_has_avx2() ? &kAvx2Table : &kScalarTable;
#else
  if (request && std::strcmp(request, "scalar") != 0) return nullptr;
  return &kScalarTable;
#endif
}

const KernelTable* g_table = nullptr;

const KernelTable& table() {
  if (!g_table) {
    const KernelTable* t = pick_table(std::getenv("TGK_ISA"));
    g_table = t ? t : pick_table(nullptr);
  }
  return *g_table;
}

} // namespace

const char* active_isa() { return table().name; }

bool force_isa(const char* name) {
  const KernelTable* t = pick_table(name);
  if (!t) return false;
  g_table = t;
  return true;
}

double dot(std::size_t n, const double* x, const double* y) {
  return table().dot(n, x, y);
}
double nrm2(std::size_t n, const double* x) { return table().nrm2(n, x); }
void axpy(std::size_t n, double a, const double* x, double* y) {
  table().axpy(n, a, x, y);
}
void axpby(std::size_t n, double a, const double* x, double b, const double* y,
           double* z) {
  table().axpby(n, a, x, b, y, z);
}
void scal(std::size_t n, double a, double* x) { table().scal(n, a, x); }
void copy_scaled(std::size_t n, double a, const double* x, double* y) {
  table().copy_scaled(n, a, x, y);
}
double axpy_dot(std::size_t n, double a, const double* x, double* w,
                const double* z) {
  return table().axpy_dot(n, a, x, w, z);
}
void spmv_csr(index_t nrows, const index_t* row_ptr, const index_t* col_idx,
              const double* values, const double* x, double* y) {
  table().spmv_csr(nrows, row_ptr, col_idx, values, x, y);
}
void gemv_t(std::size_t n, std::size_t k, const double* V, const double* x,
            double* out) {
  table().gemv_t(n, k, V, x, out);
}
void gemv_n(std::size_t n, std::size_t k, const double* V, const double* c,
            double* y) {
  table().gemv_n(n, k, V, c, y);
}
void gemm_nn(std::size_t n, std::size_t m, std::size_t k, const double* V,
             const double* P, double* Y) {
  table().gemm_nn(n, m, k, V, P, Y);
}
void gemm_tn(std::size_t n, std::size_t m, std::size_t k, const double* V,
             const double* W, double* C) {
  table().gemm_tn(n, m, k, V, W, C);
}

} // namespace tgk::kernels
