#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crwrap/wrapper.hpp"

namespace crwrap {

struct CRConfig {
  long n = 0;  // global step number
  GlobalWrappedState s;
  std::set<ProcessId> failed;
  bool operator==(const CRConfig&) const = default;
};

struct CRLabel {
  std::vector<WrappedRmsgs> rmsgs;  // index p-1: messages received by p
  std::set<ProcessId> fails;
  bool operator==(const CRLabel&) const = default;
};

struct CRRun {
  std::vector<CRConfig> configs;
  std::vector<CRLabel> labels;
  std::size_t steps() const { return labels.size(); }
};

enum class CrViolationKind {
  MessageContentMismatch,
  FailedSenderDelivered,
  MalformedLabel,
};

struct CrViolation {
  CrViolationKind kind;
  std::string detail;
};

std::string to_string(CrViolationKind k);

using CrStepResult = std::variant<CRConfig, CrViolation>;

// Synchronized lossy step: every live process handles its row of received
// messages atomically, failed processes keep their state, and the new failed
// set is exactly the label's fails.
CrStepResult cr_apply(const CRConfig& c, const CRLabel& l, const WrappedAlgorithm& alg);

// One initial configuration per core initial state and failure set.
std::vector<CRConfig> wrapped_init(const WrappedAlgorithm& alg);

StateTrace trace_of_cr_run(const CRRun& run);
GlobalState cr_trace_letter(const CRConfig& c);

std::uint64_t digest(const CRConfig& c);
std::uint64_t digest(const CRLabel& l);

}  // namespace crwrap
