#include "tgk/trace.hpp"

namespace tgk {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::maxit: return "maxit";
    case SolveStatus::breakdown: return "breakdown";
    case SolveStatus::stagnated: return "stagnated";
  }
  return "unknown";
}

} // namespace tgk
