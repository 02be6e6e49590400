#include "crwrap/stats.hpp"

#include <algorithm>

namespace crwrap {

TerminationSummary termination_stats(const std::vector<RunOutcome>& runs, int n,
                                     const std::set<ProcessId>& scope) {
  TerminationSummary s;
  s.runs = static_cast<long>(runs.size());
  s.per_process_fraction.assign(n, 0.0);

  std::vector<ProcessId> in_scope;
  for (ProcessId p = 1; p <= n; ++p)
    if (scope.empty() || scope.count(p)) in_scope.push_back(p);

  long all_decided = 0;
  std::vector<long> last_steps;
  for (const auto& r : runs) {
    bool all = true;
    long last = 0;
    for (ProcessId p : in_scope) {
      const auto& d = r.decision_steps[p - 1];
      if (d) {
        last = std::max(last, *d);
      } else {
        all = false;
      }
    }
    for (ProcessId p = 1; p <= n; ++p)
      if (r.decision_steps[p - 1]) s.per_process_fraction[p - 1] += 1.0;
    if (all) {
      ++all_decided;
      last_steps.push_back(last);
    }
  }
  if (s.runs > 0) {
    s.decided_fraction = static_cast<double>(all_decided) / static_cast<double>(s.runs);
    for (auto& f : s.per_process_fraction) f /= static_cast<double>(s.runs);
  }
  if (!last_steps.empty()) {
    std::sort(last_steps.begin(), last_steps.end());
    auto pct = [&](double q) {
      const auto idx = static_cast<std::size_t>(q * static_cast<double>(last_steps.size() - 1));
      return last_steps[idx];
    };
    s.p50 = pct(0.50);
    s.p90 = pct(0.90);
    s.p99 = pct(0.99);
    s.max_step = last_steps.back();
  }
  return s;
}

}  // namespace crwrap
