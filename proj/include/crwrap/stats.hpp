#pragma once

#include <optional>
#include <set>
#include <vector>

#include "crwrap/types.hpp"

namespace crwrap {

struct RunOutcome {
  std::vector<std::optional<long>> decision_steps;  // per process, first decided step
};

struct TerminationSummary {
  long runs = 0;
  double decided_fraction = 0.0;  // runs where every in-scope process decided
  std::vector<double> per_process_fraction;
  std::optional<long> p50;  // percentiles of the in-scope last decision step
  std::optional<long> p90;
  std::optional<long> p99;
  std::optional<long> max_step;
};

// scope empty = all processes.
TerminationSummary termination_stats(const std::vector<RunOutcome>& runs, int n,
                                     const std::set<ProcessId>& scope = {});

}  // namespace crwrap
