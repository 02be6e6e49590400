#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crwrap/types.hpp"

namespace crwrap {

struct ReceivedMessage {
  ProcessId sender = 0;
  Message m;
  bool operator==(const ReceivedMessage&) const = default;
};

// nullopt models a step with no delivered message.
using Rmsg = std::optional<ReceivedMessage>;
// Failure-detector output: the set of currently suspected processes.
using FdOutput = std::set<ProcessId>;

// Deterministic message-passing algorithm in the asynchronous model.
// `next` returns the successor state with its outbox filled; engines read the
// owed messages through `send` and then store the drained state, so a state
// at rest never owes anything.
class CrashStopAlgorithm {
 public:
  virtual ~CrashStopAlgorithm() = default;

  virtual int n() const = 0;
  virtual int n_f() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<GlobalState> initial_states() const = 0;
  virtual LocalCoreState next(const LocalCoreState& s, const Rmsg& rmsg,
                              const FdOutput& fdo) const = 0;

  std::map<ProcessId, Message> send(const LocalCoreState& s) const {
    std::map<ProcessId, Message> out;
    for (const auto& [dest, m] : s.outbox) out[dest] = m;
    return out;
  }
  static LocalCoreState drained(LocalCoreState s) {
    s.outbox.clear();
    return s;
  }
};

using AlgorithmPtr = std::shared_ptr<const CrashStopAlgorithm>;

// next = identity, send = nothing. Useful wherever the protocol content is
// irrelevant (probability enumeration, wrapper plumbing tests).
AlgorithmPtr make_null_algorithm(int n, std::vector<Value> inputs = {}, int n_f = 0);

// Every process decides its own input on its first step.
AlgorithmPtr make_instant_decide_algorithm(int n, std::vector<Value> inputs = {});

// Process 1 pings process 2 on startup; process 2 decides the pinged value and
// broadcasts the decision. Exercises real message delivery end to end.
AlgorithmPtr make_ping_algorithm(std::vector<Value> inputs = {});

AlgorithmPtr make_algorithm(const std::string& name, int n, std::vector<Value> inputs,
                            std::optional<int> n_f = std::nullopt);

std::vector<Value> default_inputs(int n);

}  // namespace crwrap
