#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crwrap/crash_stop.hpp"
#include "crwrap/prob.hpp"
#include "crwrap/types.hpp"

namespace crwrap {

struct SpecError : std::runtime_error {
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentSpec {
  enum Model { CrashStop, CrNondet, CrProb };
  std::string name = "experiment";
  Model model = CrProb;
  std::string algorithm = "ct";
  bool wrapper = true;
  int n = 3;
  std::optional<int> n_f;
  std::vector<Value> inputs;
  long seed_begin = 0;
  long seed_end = 0;  // inclusive
  long horizon = 0;
  bool stop_on_all_decided = true;
  long delta = 1;
  std::set<std::string> checks;  // validity integrity agreement bounds certificates
  enum TraceOutput { TraceNone, TraceDigest, TraceFull } traces = TraceNone;

  bool have_net = false, have_fp = false;
  ProbFamily net_family;
  ProbFamily fp_family;
  double eps_net = 0.0;
  double eps_f = 0.0;
  bool nastier = false;
  std::set<ProcessId> correct;
  std::map<ProcessId, long> cutoffs;

  long gst = 0;
  std::vector<CrashPlanEntry> crash_plan;

  void validate() const;  // throws SpecError
  std::string model_name() const;
};

ExperimentSpec parse_spec(std::istream& is, const std::string& origin);
ExperimentSpec parse_spec_file(const std::string& path);

struct SummaryRow {
  long seed = 0;
  std::string model;
  int n = 0;
  double decided_fraction = 0.0;
  std::optional<long> first_decision_step;
  std::optional<long> last_decision_step;
  long violations = 0;
  long stable_periods = 0;
  std::optional<int> b4_max_gap;
  std::optional<bool> b5_ok;
};

std::string summary_csv_header();
std::string summary_csv_line(const SummaryRow& row);

struct ViolationRecord {
  long seed = 0;
  std::string description;
  std::string localization;
};

struct ExperimentResult {
  int exit_code = 0;
  std::vector<SummaryRow> rows;
  std::vector<ViolationRecord> violations;
  long certificate_failures = 0;
  double decided_runs_fraction = 0.0;  // runs with every in-scope process decided
  int b4_worst_gap = 0;
  int bs_worst = 0;
  long b5_failures = 0;
  std::string summary_csv_path;
  std::string verdict_json_path;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                int jobs);

struct ReplayVerdict {
  long violations = 0;
  std::vector<ViolationRecord> details;
};

ReplayVerdict replay_trace(const std::string& trace_path,
                           const std::set<std::string>& checks);

}  // namespace crwrap
