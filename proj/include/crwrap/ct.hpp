#pragma once

#include <optional>
#include <vector>

#include "crwrap/algorithm.hpp"
#include "crwrap/crash_stop.hpp"

namespace crwrap {

struct CRRun;

// Rotating-coordinator consensus. One round has four phases: estimates go to
// the round's coordinator (1), the coordinator proposes the max-timestamp
// estimate once a majority arrived (2), processes ack or, on suspicion, nack
// (3), and a majority of pure acks lets the coordinator decide (4). Decisions
// spread through decide messages, which every state accepts regardless of its
// round.
AlgorithmPtr make_ct_algorithm(int n, std::vector<Value> inputs = {},
                               std::optional<int> n_f = std::nullopt);

inline ProcessId ct_coordinator(int round, int n) { return (round - 1) % n + 1; }
inline int ct_quorum(int n) { return n / 2 + 1; }

struct BoundConstants {
  int b_s = 1;
  int b_delta = 0;
  int b_adv = 0;
  int phases = 4;
};

BoundConstants ct_bounds(int n);

// 4*(round-1) + phase; strictly increases along a process's protocol progress.
int composite_round(int round, int phase);
std::optional<int> composite_round(const LocalCoreState& s);

// The part of a CT state that drives protocol actions. Stored out-of-round
// messages are excluded on purpose: holding a message for later must not count
// as acting on it.
struct CtActionView {
  bool started = false;
  int round = 0;
  int phase = 0;
  Value estimate = 0;
  int ts = 0;
  std::optional<Value> dec;
  bool operator==(const CtActionView&) const = default;
};
CtActionView ct_action_view(const LocalCoreState& s);

struct B5Scenario {
  std::set<ProcessId> correct;  // processes alive throughout; the rest crash at step 0
};

struct BoundReport {
  bool applicable = false;
  int max_msgs_per_bucket = 0;   // per (sender, receiver, composite round)
  int b4_max_gap = 0;            // widest composite gap among the fastest N_c undecided
  bool b4_ok = true;
  std::optional<bool> b5_ok;     // set only when a scenario is supplied
  std::string note;
};

BoundReport check_bounds_cs(const CrashStopRun& run, const CrashStopAlgorithm& alg,
                            const BoundConstants& consts,
                            const std::optional<B5Scenario>& scenario = std::nullopt);
BoundReport check_bounds_cr(const CRRun& run, const CrashStopAlgorithm& core,
                            const BoundConstants& consts);

}  // namespace crwrap
