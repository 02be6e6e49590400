#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "crwrap/algorithm.hpp"
#include "crwrap/crash_stop.hpp"
#include "crwrap/types.hpp"

namespace crwrap {

// Wire format of the wrapped algorithm: a payload (the head of the sender's
// buffer, or a heartbeat when there is nothing to send) paired with an
// acknowledgment naming the last payload received on the reverse channel.
struct WrappedMessage {
  std::optional<Message> payload;  // nullopt = heartbeat
  std::optional<Message> ack;      // nullopt = nothing acknowledged yet
  bool operator==(const WrappedMessage&) const = default;
};

// Per-process wrapped state. Buffers are LIFO with the most recently pushed
// message at the back. `acks[q]` is the last payload accepted from q and is
// what gets attached as the acknowledgment on the reverse channel. `seen[q]`
// is the full delivery history of the channel from q; it is what guarantees
// that a payload reaches the core algorithm at most once even when the
// single-slot acknowledgment has already moved past it.
struct WrappedState {
  LocalCoreState st;
  std::vector<std::vector<Message>> buff;
  std::vector<std::optional<Message>> acks;
  std::vector<std::set<Message>> seen;
  bool operator==(const WrappedState&) const = default;
};

using GlobalWrappedState = std::vector<WrappedState>;

// Partial map sender -> message; absent senders were silent this step.
using WrappedRmsgs = std::map<ProcessId, WrappedMessage>;

struct UnfoldStep {
  CrashStopLabel label;                               // fails always empty
  std::vector<std::pair<ProcessId, Message>> sent;    // pushed this sub-step
  WrappedState after;
};

struct UnfoldTrace {
  WrappedState start;
  std::vector<UnfoldStep> steps;
  const WrappedState& last() const { return steps.empty() ? start : steps.back().after; }
};

FdOutput silent_set(const WrappedRmsgs& rmsgs, int n);

class WrappedAlgorithm {
 public:
  explicit WrappedAlgorithm(AlgorithmPtr core);

  int n() const { return core_->n(); }
  const CrashStopAlgorithm& core() const { return *core_; }
  AlgorithmPtr core_ptr() const { return core_; }

  std::vector<GlobalWrappedState> initial_states() const;
  WrappedState blank_state(const LocalCoreState& st) const;

  // One crash-stop step per peer channel, in ascending sender order, with a
  // detector output that suspects exactly the silent senders.
  UnfoldTrace unfold(ProcessId p, const WrappedState& s, const WrappedRmsgs& rmsgs) const;

  struct StepPlan {
    enum Kind { Frozen, ShortCircuit, Unfold } kind = Unfold;
    ProcessId decide_from = 0;  // sender whose decide announcement applies
  };
  StepPlan classify(const WrappedState& s, const WrappedRmsgs& rmsgs) const;

  WrappedState next(ProcessId p, const WrappedState& s, const WrappedRmsgs& rmsgs) const;
  WrappedMessage send_to(const WrappedState& s, ProcessId dest) const;

 private:
  AlgorithmPtr core_;
};

}  // namespace crwrap
