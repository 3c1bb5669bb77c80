#pragma once
// Convergence-history plumbing shared by every solver: one TraceEvent per
// cycle boundary / projection / phase transition, carrying cumulative counter
// snapshots for the grid level the event belongs to.

#include "tgk/counter.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tgk {

enum class SolveStatus {
  converged,
  maxit,     // budget (mvps or cycles) exhausted before tolerance
  breakdown, // recurrence coefficient collapsed (short-recurrence methods)
  stagnated, // no residual progress over a full cycle
};

const char* to_string(SolveStatus s);

struct TraceEvent {
  std::string phase;  // e.g. "setup", "gmres", "gmres-dr", "project", "bicgstab"
  int cycle = 0;      // cycle index within the phase (1-based; 0 for setup)
  int level = 0;      // 0 = fine grid, 1 = coarse grid
  std::uint64_t mvp = 0;       // cumulative for this level's counter
  std::uint64_t prec = 0;
  std::uint64_t vops = 0;
  std::uint64_t audit_mvp = 0;
  double resnorm = 0.0;
};

struct SolveTrace {
  std::vector<TraceEvent> events;
  SolveStatus status = SolveStatus::maxit;

  void add(std::string phase, int cycle, int level, const OpCounter& c,
           double resnorm) {
    events.push_back({std::move(phase), cycle, level, c.mvp, c.prec, c.vops,
                      c.audit_mvp, resnorm});
  }

  // Splices another trace's events onto this one (phase pipelines).
  void append(const SolveTrace& t) {
    events.insert(events.end(), t.events.begin(), t.events.end());
  }

  const TraceEvent& back() const { return events.back(); }
  bool empty() const { return events.empty(); }
};

} // namespace tgk
