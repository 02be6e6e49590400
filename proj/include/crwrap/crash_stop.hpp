#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crwrap/algorithm.hpp"
#include "crwrap/types.hpp"

namespace crwrap {

// (receiver, sender, message): message was sent to `receiver` by `sender`.
struct MsgTriple {
  ProcessId receiver = 0;
  ProcessId sender = 0;
  Message m;
  auto operator<=>(const MsgTriple&) const = default;
};

struct CrashStopConfig {
  GlobalState s;
  std::vector<MsgTriple> in_flight;  // insertion order doubles as FIFO age
  std::set<ProcessId> failed;
  bool operator==(const CrashStopConfig&) const = default;
};

struct CrashStopLabel {
  ProcessId p = 0;
  Rmsg rmsg;
  std::set<ProcessId> fails;
  FdOutput fdo;
  bool operator==(const CrashStopLabel&) const = default;
};

struct CrashStopRun {
  std::vector<CrashStopConfig> configs;
  std::vector<CrashStopLabel> labels;
  std::size_t steps() const { return labels.size(); }
};

enum class CsViolationKind {
  FailedProcessStepped,
  MessageNotInFlight,
  FailureSetShrank,
  DuplicateMessage,
  MalformedRun,
  BadInitialState,
  ResilienceExceeded,
  DetectorInconsistent,
  StateMismatch,
};

struct CsViolation {
  CsViolationKind kind;
  long step = -1;
  std::string detail;
};

std::string to_string(CsViolationKind k);

using CsStepResult = std::variant<CrashStopConfig, CsViolation>;

CsStepResult cs_apply_step(const CrashStopConfig& c, const CrashStopLabel& l,
                           const CrashStopAlgorithm& alg);

// Suspicion oracle: arbitrary (seeded) subsets before `gst`, the exact failed
// set afterwards. gst beyond the horizon models a detector that is only ever
// required to be unreliable.
struct FdEmulator {
  long gst = 0;
  std::uint64_t seed = 0;
  FdOutput output(long step, const std::set<ProcessId>& failed, int n) const;
};

inline constexpr long kUnreliableFd = -1;  // gst value: never require accuracy

struct CsValidation {
  bool ok = true;
  std::optional<CsViolation> violation;
};

// Full run validation: initial state, every step, the resilience bound,
// per-execution message uniqueness, and the detector discipline (pass
// kUnreliableFd as gst to accept any fdo sequence).
CsValidation cs_run_valid(const CrashStopRun& run, const CrashStopAlgorithm& alg,
                          long gst = kUnreliableFd);

struct CrashPlanEntry {
  long step = 0;
  ProcessId p = 0;
};

// Deterministic round-robin executor with oldest-first delivery. Identical
// (seed, crash_plan) always reproduces the same run byte for byte.
CrashStopRun cs_fair_scheduler(const CrashStopAlgorithm& alg, std::uint64_t seed,
                               long horizon, const std::vector<CrashPlanEntry>& crash_plan,
                               long gst = 0);

// Appends `extra_steps` fair-scheduler steps to a valid run, preserving
// validity and the existing trace prefix.
CrashStopRun extend_reliable(const CrashStopRun& run, const CrashStopAlgorithm& alg,
                             long extra_steps, std::uint64_t seed = 0,
                             long gst = kUnreliableFd);

StateTrace trace_of_cs_run(const CrashStopRun& run);

}  // namespace crwrap
