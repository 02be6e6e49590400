#include "crwrap/wrapper.hpp"

#include <cassert>
#include <stdexcept>

namespace crwrap {

FdOutput silent_set(const WrappedRmsgs& rmsgs, int n) {
  FdOutput fdo;
  for (ProcessId q = 1; q <= n; ++q)
    if (!rmsgs.count(q)) fdo.insert(q);
  return fdo;
}

WrappedAlgorithm::WrappedAlgorithm(AlgorithmPtr core) : core_(std::move(core)) {
  if (!core_) throw std::invalid_argument("null core algorithm");
}

WrappedState WrappedAlgorithm::blank_state(const LocalCoreState& st) const {
  WrappedState w;
  w.st = CrashStopAlgorithm::drained(st);
  w.buff.resize(n());
  w.acks.resize(n());
  w.seen.resize(n());
  return w;
}

std::vector<GlobalWrappedState> WrappedAlgorithm::initial_states() const {
  std::vector<GlobalWrappedState> out;
  for (const auto& g : core_->initial_states()) {
    GlobalWrappedState w;
    w.reserve(g.size());
    for (const auto& ls : g) w.push_back(blank_state(ls));
    out.push_back(std::move(w));
  }
  return out;
}

UnfoldTrace WrappedAlgorithm::unfold(ProcessId p, const WrappedState& s,
                                     const WrappedRmsgs& rmsgs) const {
  const int nn = n();
  UnfoldTrace tr;
  tr.start = s;
  const FdOutput fdo = silent_set(rmsgs, nn);

  WrappedState cur = s;
  for (ProcessId q = 1; q <= nn; ++q) {
    std::optional<Message> payload;
    std::optional<Message> ack;
    if (auto it = rmsgs.find(q); it != rmsgs.end()) {
      payload = it->second.payload;
      ack = it->second.ack;
    }
    assert(!(payload && is_decide(*payload)));  // decide announcements never reach unfold

    // A payload is handed to the core only on its first delivery; heartbeats
    // and repeats turn into an empty-handed step of the same shape. The
    // acknowledgment slot tracks the last payload received, repeats included,
    // so a retransmitted head that was already consumed still gets re-acked
    // and can leave the sender's buffer.
    const bool fresh = payload && !cur.seen[q - 1].count(*payload);
    Rmsg rmsg;
    if (fresh) rmsg = ReceivedMessage{q, *payload};

    UnfoldStep step;
    step.label = CrashStopLabel{p, rmsg, {}, fdo};

    LocalCoreState st2 = core_->next(cur.st, rmsg, fdo);
    if (fresh) cur.seen[q - 1].insert(*payload);
    if (payload) cur.acks[q - 1] = *payload;
    // Acknowledged head comes off before anything new goes on.
    auto& out_q = cur.buff[q - 1];
    if (ack && !out_q.empty() && out_q.back() == *ack) out_q.pop_back();
    for (const auto& [dest, m] : core_->send(st2)) {
      cur.buff[dest - 1].push_back(m);
      step.sent.emplace_back(dest, m);
    }
    cur.st = CrashStopAlgorithm::drained(st2);

    step.after = cur;
    tr.steps.push_back(std::move(step));
  }
  return tr;
}

WrappedAlgorithm::StepPlan WrappedAlgorithm::classify(const WrappedState& s,
                                                      const WrappedRmsgs& rmsgs) const {
  if (s.st.dec) return StepPlan{StepPlan::Frozen, 0};
  for (ProcessId q = 1; q <= n(); ++q) {
    auto it = rmsgs.find(q);
    if (it != rmsgs.end() && it->second.payload && is_decide(*it->second.payload))
      return StepPlan{StepPlan::ShortCircuit, q};
  }
  return StepPlan{StepPlan::Unfold, 0};
}

WrappedState WrappedAlgorithm::next(ProcessId p, const WrappedState& s,
                                    const WrappedRmsgs& rmsgs) const {
  const StepPlan plan = classify(s, rmsgs);
  switch (plan.kind) {
    case StepPlan::Frozen:
      return s;
    case StepPlan::ShortCircuit: {
      // Adopt the announced decision immediately; everything else this step
      // is dropped, including buffer maintenance.
      const Message dm = *rmsgs.at(plan.decide_from).payload;
      const FdOutput fdo = silent_set(rmsgs, n());
      WrappedState cur = s;
      LocalCoreState st2 =
          core_->next(cur.st, ReceivedMessage{plan.decide_from, dm}, fdo);
      assert(st2.dec.has_value());
      cur.seen[plan.decide_from - 1].insert(dm);
      for (const auto& [dest, m] : core_->send(st2)) cur.buff[dest - 1].push_back(m);
      cur.st = CrashStopAlgorithm::drained(st2);
      return cur;
    }
    case StepPlan::Unfold:
      return unfold(p, s, rmsgs).last();
  }
  return s;
}

WrappedMessage WrappedAlgorithm::send_to(const WrappedState& s, ProcessId dest) const {
  WrappedMessage wm;
  wm.ack = s.acks[dest - 1];
  if (s.st.dec) {
    wm.payload = decide_message(*s.st.dec);  // decided processes only announce
  } else if (!s.buff[dest - 1].empty()) {
    wm.payload = s.buff[dest - 1].back();
  }
  return wm;
}

}  // namespace crwrap
