#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crwrap {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool all_pass() const {
    for (const auto& r : results)
      if (!r.pass) return false;
    return !results.empty();
  }
};

// Runs the full acceptance suite, printing one pass/fail line per criterion.
// Artifacts land under work_dir.
AcceptanceReport run_acceptance(const std::string& work_dir, std::ostream& log);

}  // namespace crwrap
