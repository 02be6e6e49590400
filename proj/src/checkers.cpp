#include "crwrap/checkers.hpp"

#include <algorithm>
#include <sstream>

namespace crwrap {

std::string to_string(Property p) {
  switch (p) {
    case Property::Validity: return "validity";
    case Property::Integrity: return "integrity";
    case Property::Agreement: return "agreement";
    case Property::Invariant: return "invariant";
  }
  return "?";
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << to_string(property) << " violated at (i=" << i << ",p=" << p << ")";
  if (j > 0) os << " vs (j=" << j << ",q=" << q << ")";
  if (v1) os << " value=" << *v1;
  if (v2) os << " other=" << *v2;
  return os.str();
}

void ValidityChecker::feed(const GlobalState& letter) {
  ++index_;
  if (violation_) return;
  if (index_ == 1) {
    for (const auto& ls : letter) initial_inputs_.push_back(ls.inp);
  }
  for (std::size_t k = 0; k < letter.size(); ++k) {
    const auto& dec = letter[k].dec;
    if (!dec) continue;
    if (std::find(initial_inputs_.begin(), initial_inputs_.end(), *dec) ==
        initial_inputs_.end()) {
      Violation v;
      v.property = Property::Validity;
      v.i = index_;
      v.p = static_cast<ProcessId>(k + 1);
      v.v1 = *dec;
      violation_ = v;
      return;
    }
  }
}

void IntegrityChecker::feed(const GlobalState& letter) {
  ++index_;
  if (violation_) return;
  if (first_.empty()) first_.resize(letter.size());
  for (std::size_t k = 0; k < letter.size(); ++k) {
    const auto& dec = letter[k].dec;
    auto& f = first_[k];
    if (f) {
      // Once decided, every later letter must show the same decision;
      // reverting to undecided counts as a change.
      if (!dec || *dec != f->v) {
        Violation v;
        v.property = Property::Integrity;
        v.i = f->i;
        v.p = static_cast<ProcessId>(k + 1);
        v.j = index_;
        v.q = static_cast<ProcessId>(k + 1);
        v.v1 = f->v;
        v.v2 = dec;
        violation_ = v;
        return;
      }
    } else if (dec) {
      f = First{index_, *dec};
    }
  }
}

void AgreementChecker::feed(const GlobalState& letter) {
  ++index_;
  if (violation_) return;
  for (std::size_t k = 0; k < letter.size(); ++k) {
    const auto& dec = letter[k].dec;
    if (!dec) continue;
    if (!have_) {
      have_ = true;
      i_ = index_;
      p_ = static_cast<ProcessId>(k + 1);
      v_ = *dec;
    } else if (*dec != v_) {
      Violation v;
      v.property = Property::Agreement;
      v.i = i_;
      v.p = p_;
      v.j = index_;
      v.q = static_cast<ProcessId>(k + 1);
      v.v1 = v_;
      v.v2 = *dec;
      violation_ = v;
      return;
    }
  }
}

void InvariantChecker::feed(const GlobalState& letter) {
  ++index_;
  if (violation_) return;
  if (!good_(letter)) {
    Violation v;
    v.property = Property::Invariant;
    v.i = index_;
    violation_ = v;
  }
}

std::optional<Violation> check_validity(const StateTrace& trace) {
  ValidityChecker c;
  for (const auto& l : trace) c.feed(l);
  return c.result();
}

std::optional<Violation> check_integrity(const StateTrace& trace) {
  IntegrityChecker c;
  for (const auto& l : trace) c.feed(l);
  return c.result();
}

std::optional<Violation> check_agreement(const StateTrace& trace) {
  AgreementChecker c;
  for (const auto& l : trace) c.feed(l);
  return c.result();
}

std::optional<Violation> check_state_invariant(const StateTrace& trace,
                                               const StatePredicate& good) {
  InvariantChecker c(good);
  for (const auto& l : trace) c.feed(l);
  return c.result();
}

bool one_changes(const StateTrace& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    int changed = 0;
    for (std::size_t k = 0; k < trace[i].size(); ++k)
      if (!(trace[i][k] == trace[i - 1][k])) ++changed;
    if (changed > 1) return false;
  }
  return true;
}

}  // namespace crwrap
