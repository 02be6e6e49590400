#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace crwrap {

// Processes are numbered 1..N.
using ProcessId = int;
using Value = std::int64_t;

namespace msg {
// Message kinds shared by the bundled algorithms. Decide is reserved: it is
// the broadcast that terminates a run and it bypasses the usual buffering
// rules in the wrapped setting.
inline constexpr int kEstimate = 1;
inline constexpr int kPropose = 2;
inline constexpr int kAck = 3;
inline constexpr int kNack = 4;
inline constexpr int kDecide = 5;
inline constexpr int kPing = 10;
}  // namespace msg

struct Message {
  int kind = 0;
  int round = 0;
  Value value = 0;
  int ts = 0;
  auto operator<=>(const Message&) const = default;
};

inline Message decide_message(Value v) { return Message{msg::kDecide, 0, v, 0}; }
inline bool is_decide(const Message& m) { return m.kind == msg::kDecide; }

// Chandra-Toueg per-process bookkeeping. `collected` and `replies` belong to
// the round the process currently coordinates. Estimates and replies that
// arrive for one of this process's future coordinated rounds wait in the
// pending stores until that round starts; without them a coordinator whose
// peers raced ahead could wait forever on input that was already delivered.
struct CtPayload {
  ProcessId self = 1;
  bool started = false;
  int round = 1;
  int phase = 1;
  Value estimate = 0;
  int ts = 0;
  std::map<ProcessId, std::pair<Value, int>> collected;
  std::map<ProcessId, bool> replies;  // true = ack, false = nack
  std::map<int, std::map<ProcessId, std::pair<Value, int>>> pending_est;
  std::map<int, std::map<ProcessId, bool>> pending_replies;
  bool operator==(const CtPayload&) const = default;
};

struct ToyPayload {
  int a = 0;
  int b = 0;
  bool operator==(const ToyPayload&) const = default;
};

using Payload = std::variant<std::monostate, ToyPayload, CtPayload>;

// One process's algorithm state. `outbox` holds the messages owed by the
// transition that produced this state; it is drained by the execution engines
// right after they materialize the sends, so states at rest always carry an
// empty outbox.
struct LocalCoreState {
  Value inp = 0;
  std::optional<Value> dec;
  Payload payload;
  std::vector<std::pair<ProcessId, Message>> outbox;
  bool operator==(const LocalCoreState&) const = default;
};

using GlobalState = std::vector<LocalCoreState>;  // index p-1
using StateTrace = std::vector<GlobalState>;

// Stable 64-bit FNV-1a stream, used for payload and label digests that must
// not change across platforms or runs.
struct StableHash {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t len);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void opt_i64(const std::optional<std::int64_t>& v) {
    u64(v.has_value() ? 1 : 0);
    if (v) i64(*v);
  }
};

std::uint64_t digest(const Message& m);
// Covers (inp, dec) plus the payload fields that identify a protocol state;
// for CT that is (round, phase, estimate, ts). Coordinator bookkeeping is
// deliberately left out so digests stay comparable across quorum growth.
std::uint64_t payload_digest(const LocalCoreState& s);
std::uint64_t digest(const GlobalState& s);

std::string to_string(const Message& m);
std::string to_string(const LocalCoreState& s);

}  // namespace crwrap
