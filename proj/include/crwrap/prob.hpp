#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "crwrap/types.hpp"

namespace crwrap {

// Time-indexed probability in (0,1), from a small family of shapes whose
// extremes are known in closed form so the epsilon bounds can be checked at
// construction instead of being taken on faith.
struct ProbFamily {
  enum Kind { Constant, Schedule, Sinusoid } kind = Constant;
  double p = 0.5;                                  // Constant
  std::vector<std::pair<long, double>> schedule;   // Schedule: (from_step, p), sorted
  double base = 0.5, amplitude = 0.0;              // Sinusoid
  long period = 1;

  double at(long t) const;
  double min_value() const;
  double max_value() const;

  static ProbFamily constant(double p);
  static ProbFamily step_schedule(std::vector<std::pair<long, double>> sched);
  static ProbFamily sinusoid(double base, double amplitude, long period);
};

// Delivery and availability probabilities with their declared lower/upper
// margins. In nastier mode only the processes in `correct` keep the two-sided
// availability bound; everyone else is permanently down from their cutoff on.
struct ProbModel {
  int n = 0;
  ProbFamily net_family;
  ProbFamily fp_family;
  double eps_net = 0.0;
  double eps_f = 0.0;
  enum Mode { Standard, Nastier } mode = Standard;
  std::set<ProcessId> correct;          // nastier only
  std::map<ProcessId, long> cutoffs;    // nastier only

  // net(receiver, sender, t): probability the message sender -> receiver sent
  // at step t is delivered.
  double net(ProcessId receiver, ProcessId sender, long t) const;
  // fp(p, t): probability that p is up at step t.
  double fp(ProcessId p, long t) const;

  void validate() const;  // throws std::invalid_argument on a broken bound

  static ProbModel standard(int n, ProbFamily net, ProbFamily fp, double eps_net,
                            double eps_f);
  static ProbModel nastier(int n, ProbFamily net, ProbFamily fp, double eps_net,
                           double eps_f, std::set<ProcessId> correct,
                           std::map<ProcessId, long> cutoffs);
  // No bound checks; for degenerate lossless/failure-free setups.
  static ProbModel unchecked(int n, ProbFamily net, ProbFamily fp);
};

// Counter-based generator: every draw is keyed by (seed, stream, counter), so
// draw order never matters and any run is replayable from its seed alone.
struct Rng {
  std::uint64_t seed = 0;

  static std::uint64_t mix(std::uint64_t z);
  double uniform(std::uint64_t stream, std::uint64_t counter) const;

  // Stream layout for one simulation.
  static std::uint64_t channel_stream(ProcessId receiver, ProcessId sender, int n);
  static std::uint64_t fail_stream(ProcessId p, int n);
  static std::uint64_t init_state_stream();
  static std::uint64_t init_fail_stream(ProcessId p);
};

}  // namespace crwrap
