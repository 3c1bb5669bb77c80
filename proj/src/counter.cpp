#include "tgk/counter.hpp"

#include "tgk/precond.hpp"

#include <cstring>

namespace tgk {

void InstrumentedOperator::apply_impl(const double* x, double* y) {
  if (M) {
    work_.resize(n());
    apply_prec(*M, x, work_.data());
    spmv(*A, work_.data(), y);
  } else {
    spmv(*A, x, y);
  }
}

void InstrumentedOperator::apply(const double* x, double* y) {
  counter->mvp += 1;
  if (M) counter->prec += 1;
  apply_impl(x, y);
}

void InstrumentedOperator::apply_audit(const double* x, double* y) {
  counter->audit_mvp += 1;
  apply_impl(x, y);
}

void InstrumentedOperator::apply_minv(const double* v, double* w) {
  if (M) {
    counter->prec += 1;
    apply_prec(*M, v, w);
  } else {
    std::memcpy(w, v, n() * sizeof(double));
  }
}

} // namespace tgk
