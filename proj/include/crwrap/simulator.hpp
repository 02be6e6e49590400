#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "crwrap/cr_model.hpp"
#include "crwrap/prob.hpp"

namespace crwrap {

struct EnumerationTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One Bernoulli draw per live channel (delivery) and per process (next-step
// availability). Draw streams are keyed by channel/process and counted by the
// step number, so the label depends only on (seed, configuration).
CRLabel sample_label(const CRConfig& c, const ProbModel& pm, const Rng& rng,
                     const WrappedAlgorithm& alg);

CRConfig initial_config(const ProbModel& pm, const WrappedAlgorithm& alg, const Rng& rng);

// Exact initial distribution: uniform over initial states, product form over
// failure sets.
std::vector<std::pair<CRConfig, double>> initial_distribution(const ProbModel& pm,
                                                              const WrappedAlgorithm& alg);

// Exact one-step distribution from c (small instances only).
std::vector<std::pair<CRConfig, double>> next_distribution(const CRConfig& c,
                                                           const ProbModel& pm,
                                                           const WrappedAlgorithm& alg);

// Probability of the single transition c -> c2. Independent per-receiver
// factorization; agrees with next_distribution and with sampling frequencies.
double trans_prob(const CRConfig& c, const CRConfig& c2, const ProbModel& pm,
                  const WrappedAlgorithm& alg);

struct RunOptions {
  long horizon = 0;
  bool stop_on_all_decided = false;
  std::set<ProcessId> decide_scope;  // empty = every process
};

// Step-by-step execution of one seeded run.
class CrExecutor {
 public:
  CrExecutor(const WrappedAlgorithm& alg, const ProbModel& pm, std::uint64_t seed);
  const CRConfig& config() const { return config_; }
  const CRLabel& last_label() const { return label_; }
  void step();
  bool all_decided(const std::set<ProcessId>& scope) const;

 private:
  const WrappedAlgorithm& alg_;
  const ProbModel& pm_;
  Rng rng_;
  CRConfig config_;
  CRLabel label_;
};

CRRun run_cr(const WrappedAlgorithm& alg, const ProbModel& pm, std::uint64_t seed,
             const RunOptions& opts);

using SelectionFn = std::function<std::set<ProcessId>(const CRConfig&)>;

// Start indices i such that configurations i+1 .. i+delta+1 all have exactly
// the processes outside sel(c_i) failed and every channel inside sel(c_i) is
// delivered on each step in between.
std::vector<long> detect_stable_periods(const CRRun& run, long delta, const SelectionFn& sel);

// Exact probability that a stable window for C of length delta starts at c.
double stable_window_prob(const CRConfig& c, const std::set<ProcessId>& correct,
                          long delta, const ProbModel& pm, const WrappedAlgorithm& alg);

}  // namespace crwrap
