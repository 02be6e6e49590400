#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crwrap/types.hpp"

namespace crwrap {

enum class Property { Validity, Integrity, Agreement, Invariant };

std::string to_string(Property p);

// Witness indices are 1-based letter positions, matching the convention that
// a trace starts at letter 1.
struct Violation {
  Property property = Property::Validity;
  long i = 0;
  ProcessId p = 0;
  long j = 0;
  ProcessId q = 0;
  std::optional<Value> v1;
  std::optional<Value> v2;
  std::string describe() const;
};

// Incremental checkers; feed letters in order starting at index 1. The batch
// check_* helpers below run them over a full trace.
class ValidityChecker {
 public:
  void feed(const GlobalState& letter);
  const std::optional<Violation>& result() const { return violation_; }

 private:
  long index_ = 0;
  std::vector<Value> initial_inputs_;
  std::optional<Violation> violation_;
};

class IntegrityChecker {
 public:
  void feed(const GlobalState& letter);
  const std::optional<Violation>& result() const { return violation_; }

 private:
  struct First {
    long i = 0;
    Value v = 0;
  };
  long index_ = 0;
  std::vector<std::optional<First>> first_;
  std::optional<Violation> violation_;
};

class AgreementChecker {
 public:
  void feed(const GlobalState& letter);
  const std::optional<Violation>& result() const { return violation_; }

 private:
  long index_ = 0;
  std::optional<Violation> violation_;
  bool have_ = false;
  long i_ = 0;
  ProcessId p_ = 0;
  Value v_ = 0;
};

using StatePredicate = std::function<bool(const GlobalState&)>;

class InvariantChecker {
 public:
  explicit InvariantChecker(StatePredicate good) : good_(std::move(good)) {}
  void feed(const GlobalState& letter);
  const std::optional<Violation>& result() const { return violation_; }

 private:
  StatePredicate good_;
  long index_ = 0;
  std::optional<Violation> violation_;
};

std::optional<Violation> check_validity(const StateTrace& trace);
std::optional<Violation> check_integrity(const StateTrace& trace);
std::optional<Violation> check_agreement(const StateTrace& trace);
std::optional<Violation> check_state_invariant(const StateTrace& trace,
                                               const StatePredicate& good);

// At most one process's local state differs between consecutive letters.
// Holds for interleaved executions, fails for synchronized ones; kept here as
// the canonical example of a property that detours can repair.
bool one_changes(const StateTrace& trace);

}  // namespace crwrap
