#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"

#include "crwrap/acceptance.hpp"
#include "crwrap/algorithm.hpp"
#include "crwrap/experiment.hpp"
#include "crwrap/simulator.hpp"
#include "crwrap/trace_io.hpp"

namespace {

int env_jobs() {
  if (const char* j = std::getenv("CRWRAP_JOBS")) return std::max(1, std::atoi(j));
  return 4;
}

std::string env_out_dir(const std::string& fallback) {
  if (const char* d = std::getenv("CRWRAP_OUT_DIR")) return d;
  return fallback;
}

int cmd_run(const std::string& spec_path, const std::string& out_dir, int jobs) {
  auto spec = crwrap::parse_spec_file(spec_path);
  auto result = crwrap::run_experiment(spec, out_dir, jobs);
  std::cout << "summary: " << result.summary_csv_path << "\n"
            << "verdict: " << result.verdict_json_path << "\n"
            << "violations: ";
  long v = 0;
  for (const auto& row : result.rows) v += row.violations;
  std::cout << v << ", certificate failures: " << result.certificate_failures
            << ", decided fraction: " << result.decided_runs_fraction << "\n";
  return result.exit_code;
}

int cmd_replay(const std::string& trace_path, const std::vector<std::string>& checks) {
  std::set<std::string> cs(checks.begin(), checks.end());
  auto verdict = crwrap::replay_trace(trace_path, cs);
  for (const auto& d : verdict.details) std::cout << d.description << "\n";
  std::cout << "violations: " << verdict.violations << "\n";
  return verdict.violations > 0 ? 1 : 0;
}

int cmd_enumerate(const std::string& spec_path) {
  auto spec = crwrap::parse_spec_file(spec_path);
  if (spec.model != crwrap::ExperimentSpec::CrProb)
    throw crwrap::SpecError("enumerate requires model = cr-prob");
  if (spec.n > 2)
    throw crwrap::SpecError("enumerate is exhaustive and limited to n <= 2; got n = " +
                            std::to_string(spec.n));
  auto alg = crwrap::make_algorithm(spec.algorithm, spec.n, spec.inputs, spec.n_f);
  crwrap::WrappedAlgorithm walg(alg);
  auto pm = spec.nastier
                ? crwrap::ProbModel::nastier(spec.n, spec.net_family, spec.fp_family,
                                             spec.eps_net, spec.eps_f, spec.correct,
                                             spec.cutoffs)
                : crwrap::ProbModel::standard(spec.n, spec.net_family, spec.fp_family,
                                              spec.eps_net, spec.eps_f);
  double worst = 0.0;
  for (auto& [c0, pr0] : crwrap::initial_distribution(pm, walg)) {
    double sum = 0.0;
    auto dist = crwrap::next_distribution(c0, pm, walg);
    for (auto& [c2, pr] : dist) sum += pr;
    worst = std::max(worst, std::abs(sum - 1.0));
    std::cout << "config(n=" << c0.n << ", failed=" << c0.failed.size()
              << ", iota=" << pr0 << "): " << dist.size()
              << " successors, total probability " << sum << "\n";
  }
  std::cout << "max |sum-1| = " << worst << "\n";
  return worst < 1e-9 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crash-recovery consensus wrapper toolkit"};
  app.require_subcommand(1);

  std::string out_dir = env_out_dir("crwrap-out");
  int jobs = env_jobs();
  app.add_option("--out-dir", out_dir, "artifact output directory");
  app.add_option("--jobs", jobs, "worker threads for seed sweeps");

  std::string spec_path;
  auto* run = app.add_subcommand("run", "execute an experiment spec");
  run->add_option("spec", spec_path, "experiment spec file")->required();

  std::string trace_path;
  std::vector<std::string> checks;
  auto* replay = app.add_subcommand("replay", "re-check a stored trace");
  replay->add_option("trace", trace_path, "trace file (jsonl)")->required();
  replay->add_option("--checks", checks, "checker names")->delimiter(',');

  std::string enum_spec;
  auto* enumerate = app.add_subcommand("enumerate", "exhaustive transition probabilities");
  enumerate->add_option("spec", enum_spec, "experiment spec file")->required();

  std::string acc_dir;
  auto* acceptance = app.add_subcommand("acceptance", "run the bundled acceptance suite");
  acceptance->add_option("--work-dir", acc_dir, "acceptance working directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(spec_path, out_dir, jobs);
    if (replay->parsed()) return cmd_replay(trace_path, checks);
    if (enumerate->parsed()) return cmd_enumerate(enum_spec);
    if (acceptance->parsed()) {
      const std::string dir = acc_dir.empty() ? out_dir + "/acceptance" : acc_dir;
      auto report = crwrap::run_acceptance(dir, std::cout);
      return report.all_pass() ? 0 : 1;
    }
  } catch (const crwrap::SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return 2;
  } catch (const crwrap::EnumerationTooLarge& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
