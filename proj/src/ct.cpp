#include "crwrap/ct.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <stdexcept>

#include "crwrap/cr_model.hpp"

namespace crwrap {

BoundConstants ct_bounds(int n) {
  BoundConstants b;
  b.b_s = 1;
  b.b_delta = 4 * n;
  b.b_adv = b.phases * (n / 2);
  return b;
}

int composite_round(int round, int phase) { return 4 * (round - 1) + phase; }

std::optional<int> composite_round(const LocalCoreState& s) {
  const auto* ct = std::get_if<CtPayload>(&s.payload);
  if (!ct) return std::nullopt;
  return composite_round(ct->round, ct->phase);
}

CtActionView ct_action_view(const LocalCoreState& s) {
  const auto& p = std::get<CtPayload>(s.payload);
  return CtActionView{p.started, p.round, p.phase, p.estimate, p.ts, s.dec};
}

namespace {

std::vector<Value> fill_inputs(int n, std::vector<Value> inputs) {
  if (inputs.empty()) return default_inputs(n);
  if (static_cast<int>(inputs.size()) != n)
    throw std::invalid_argument("inputs size does not match process count");
  return inputs;
}

class CtAlgorithm : public CrashStopAlgorithm {
 public:
  CtAlgorithm(int n, std::vector<Value> inputs, std::optional<int> n_f)
      : n_(n),
        n_f_(n_f.value_or((n - 1) / 2)),
        inputs_(fill_inputs(n, std::move(inputs))) {
    if (n_ < 1) throw std::invalid_argument("need at least one process");
    if (n_f_ >= ct_quorum(n_))
      throw std::invalid_argument("ct requires a majority of correct processes");
  }

  int n() const override { return n_; }
  int n_f() const override { return n_f_; }
  std::string name() const override { return "ct"; }

  std::vector<GlobalState> initial_states() const override {
    GlobalState g(n_);
    for (int p = 1; p <= n_; ++p) {
      auto& ls = g[p - 1];
      ls.inp = inputs_[p - 1];
      CtPayload ct;
      ct.self = p;
      ct.estimate = ls.inp;
      ct.ts = 0;
      ls.payload = ct;
    }
    return {g};
  }

  LocalCoreState next(const LocalCoreState& s, const Rmsg& rmsg,
                      const FdOutput& fdo) const override {
    if (s.dec) return s;  // decisions are absorbing

    LocalCoreState r = s;
    if (rmsg && is_decide(rmsg->m)) {
      adopt_decision(r, rmsg->m.value);
      return r;
    }

    auto& ct = std::get<CtPayload>(r.payload);
    if (!ct.started) {
      ct.started = true;
      enter_round(r, ct, 1);
    }
    if (rmsg && !r.dec) handle(r, ct, rmsg->sender, rmsg->m);
    settle(r, ct, fdo);
    return r;
  }

 private:
  void adopt_decision(LocalCoreState& r, Value v) const {
    r.dec = v;
    const auto& ct = std::get<CtPayload>(r.payload);
    for (ProcessId q = 1; q <= n_; ++q)
      if (q != ct.self) r.outbox.emplace_back(q, decide_message(v));
  }

  void handle(LocalCoreState& r, CtPayload& ct, ProcessId from, const Message& m) const {
    switch (m.kind) {
      case msg::kEstimate:
        if (ct_coordinator(m.round, n_) != ct.self) return;
        if (m.round == ct.round && ct.phase == 2) {
          ct.collected[from] = {m.value, m.ts};
          try_propose(r, ct);
        } else if (m.round > ct.round) {
          ct.pending_est[m.round][from] = {m.value, m.ts};
        }
        return;
      case msg::kPropose:
        if (m.round == ct.round && ct.phase == 3 && from == ct_coordinator(ct.round, n_)) {
          ct.estimate = m.value;
          ct.ts = ct.round;
          r.outbox.emplace_back(from, Message{msg::kAck, ct.round, 0, 0});
          ct.phase = 4;
        }
        return;
      case msg::kAck:
      case msg::kNack: {
        if (ct_coordinator(m.round, n_) != ct.self) return;
        const bool positive = m.kind == msg::kAck;
        if (m.round == ct.round && (ct.phase == 2 || ct.phase == 4)) {
          ct.replies[from] = positive;
          try_finish(r, ct);
        } else if (m.round > ct.round) {
          ct.pending_replies[m.round][from] = positive;
        }
        return;
      }
      default:
        return;  // unknown payloads are treated as noise
    }
  }

  void enter_round(LocalCoreState& r, CtPayload& ct, int round) const {
    ct.round = round;
    ct.collected.clear();
    ct.replies.clear();
    // Rounds already passed can never be entered again; their stored
    // messages are dead weight. The entry for `round` itself is consumed
    // below.
    ct.pending_est.erase(ct.pending_est.begin(), ct.pending_est.lower_bound(round));
    ct.pending_replies.erase(ct.pending_replies.begin(),
                             ct.pending_replies.lower_bound(round));
    const ProcessId coord = ct_coordinator(round, n_);
    if (coord == ct.self) {
      ct.phase = 2;
      if (auto it = ct.pending_est.find(round); it != ct.pending_est.end()) {
        ct.collected = std::move(it->second);
        ct.pending_est.erase(it);
      }
      ct.collected[ct.self] = {ct.estimate, ct.ts};
      if (auto it = ct.pending_replies.find(round); it != ct.pending_replies.end()) {
        ct.replies = std::move(it->second);
        ct.pending_replies.erase(it);
      }
      try_propose(r, ct);
    } else {
      ct.phase = 3;
      r.outbox.emplace_back(coord, Message{msg::kEstimate, round, ct.estimate, ct.ts});
    }
  }

  void try_propose(LocalCoreState& r, CtPayload& ct) const {
    if (ct.phase != 2 || static_cast<int>(ct.collected.size()) < ct_quorum(n_)) return;
    // Highest timestamp wins; ties go to the lowest process id.
    auto best = ct.collected.begin();
    for (auto it = std::next(ct.collected.begin()); it != ct.collected.end(); ++it)
      if (it->second.second > best->second.second) best = it;
    ct.estimate = best->second.first;
    ct.ts = ct.round;
    for (ProcessId q = 1; q <= n_; ++q)
      if (q != ct.self)
        r.outbox.emplace_back(q, Message{msg::kPropose, ct.round, ct.estimate, 0});
    ct.phase = 4;
    ct.replies[ct.self] = true;
    try_finish(r, ct);
  }

  void try_finish(LocalCoreState& r, CtPayload& ct) const {
    if (ct.phase != 4 || ct_coordinator(ct.round, n_) != ct.self) return;
    if (static_cast<int>(ct.replies.size()) < ct_quorum(n_)) return;
    bool all_ack = true;
    for (const auto& [q, ok] : ct.replies) {
      (void)q;
      all_ack = all_ack && ok;
    }
    if (all_ack) {
      r.dec = ct.estimate;
      for (ProcessId q = 1; q <= n_; ++q)
        if (q != ct.self) r.outbox.emplace_back(q, decide_message(ct.estimate));
    } else {
      enter_round(r, ct, ct.round + 1);
    }
  }

  // Suspicion-driven progress, run to a fixpoint so a state is stable under
  // the detector output that produced it.
  void settle(LocalCoreState& r, CtPayload& ct, const FdOutput& fdo) const {
    while (!r.dec) {
      const ProcessId coord = ct_coordinator(ct.round, n_);
      if (ct.phase == 3 && fdo.count(coord)) {
        r.outbox.emplace_back(coord, Message{msg::kNack, ct.round, 0, 0});
        enter_round(r, ct, ct.round + 1);
        continue;
      }
      if (ct.phase == 4 && coord != ct.self && fdo.count(coord)) {
        enter_round(r, ct, ct.round + 1);
        continue;
      }
      break;
    }
  }

  int n_;
  int n_f_;
  std::vector<Value> inputs_;
};

}  // namespace

AlgorithmPtr make_ct_algorithm(int n, std::vector<Value> inputs, std::optional<int> n_f) {
  return std::make_shared<CtAlgorithm>(n, std::move(inputs), n_f);
}

namespace {

int phase_of_kind(int kind) {
  switch (kind) {
    case msg::kEstimate: return 1;
    case msg::kPropose: return 2;
    case msg::kAck:
    case msg::kNack: return 3;
    default: return 4;
  }
}

struct BoundScan {
  std::map<std::tuple<ProcessId, ProcessId, int>, int> bucket;  // sender, receiver, composite
  int max_bucket = 0;
  int b4_max_gap = 0;

  void message(ProcessId sender, ProcessId receiver, const Message& m) {
    const int comp = composite_round(std::max(m.round, 1), phase_of_kind(m.kind));
    int& c = bucket[{sender, receiver, comp}];
    ++c;
    max_bucket = std::max(max_bucket, c);
  }

  // Gap among the fastest n_c undecided processes in this global state.
  void state(const GlobalState& g, int n_c) {
    std::vector<int> undecided;
    for (const auto& ls : g)
      if (!ls.dec)
        if (auto c = composite_round(ls)) undecided.push_back(*c);
    if (static_cast<int>(undecided.size()) < 2) return;
    std::sort(undecided.begin(), undecided.end(), std::greater<int>());
    const int take = std::min<int>(n_c, static_cast<int>(undecided.size()));
    b4_max_gap = std::max(b4_max_gap, undecided[0] - undecided[take - 1]);
  }
};

bool is_ct_state(const GlobalState& g) {
  return !g.empty() && std::holds_alternative<CtPayload>(g[0].payload);
}

}  // namespace

BoundReport check_bounds_cs(const CrashStopRun& run, const CrashStopAlgorithm& alg,
                            const BoundConstants& consts,
                            const std::optional<B5Scenario>& scenario) {
  BoundReport rep;
  if (run.configs.empty() || !is_ct_state(run.configs[0].s)) {
    rep.note = "bounds only apply to ct runs; skipped";
    return rep;
  }
  rep.applicable = true;
  const int n_c = alg.n() - alg.n_f();

  BoundScan scan;
  scan.state(run.configs[0].s, n_c);
  for (std::size_t i = 0; i < run.labels.size(); ++i) {
    const auto& before = run.configs[i].in_flight;
    for (const auto& t : run.configs[i + 1].in_flight) {
      if (std::find(before.begin(), before.end(), t) == before.end())
        scan.message(t.sender, t.receiver, t.m);
    }
    scan.state(run.configs[i + 1].s, n_c);
  }
  rep.max_msgs_per_bucket = scan.max_bucket;
  rep.b4_max_gap = scan.b4_max_gap;
  rep.b4_ok = scan.b4_max_gap <= consts.b_delta && scan.max_bucket <= consts.b_s;

  if (scenario) {
    // All correct processes must decide before any of them reaches
    // r_max(start) + b_adv composite rounds.
    int r_max = 0;
    for (ProcessId p : scenario->correct)
      if (auto c = composite_round(run.configs[0].s[p - 1])) r_max = std::max(r_max, *c);
    const int threshold = r_max + consts.b_adv;
    bool ok = true;
    for (const auto& cfg : run.configs) {
      bool any_at_threshold = false;
      bool all_decided = true;
      for (ProcessId p : scenario->correct) {
        const auto& ls = cfg.s[p - 1];
        if (auto c = composite_round(ls); c && *c >= threshold) any_at_threshold = true;
        all_decided = all_decided && ls.dec.has_value();
      }
      if (any_at_threshold && !all_decided) {
        ok = false;
        break;
      }
    }
    rep.b5_ok = ok;
  }
  return rep;
}

BoundReport check_bounds_cr(const CRRun& run, const CrashStopAlgorithm& core,
                            const BoundConstants& consts) {
  BoundReport rep;
  if (run.configs.empty()) {
    rep.note = "empty run";
    return rep;
  }
  GlobalState first;
  for (const auto& ws : run.configs[0].s) first.push_back(ws.st);
  if (!is_ct_state(first)) {
    rep.note = "bounds only apply to ct runs; skipped";
    return rep;
  }
  rep.applicable = true;
  const int n_c = core.n() - core.n_f();
  const int n = core.n();

  BoundScan scan;
  scan.state(first, n_c);
  for (std::size_t i = 0; i + 1 < run.configs.size(); ++i) {
    const auto& a = run.configs[i].s;
    const auto& b = run.configs[i + 1].s;
    for (ProcessId p = 1; p <= n; ++p) {
      for (ProcessId q = 1; q <= n; ++q) {
        const auto& before = a[p - 1].buff[q - 1];
        for (const auto& m : b[p - 1].buff[q - 1])
          if (std::find(before.begin(), before.end(), m) == before.end())
            scan.message(p, q, m);
      }
    }
    GlobalState g;
    for (const auto& ws : b) g.push_back(ws.st);
    scan.state(g, n_c);
  }
  rep.max_msgs_per_bucket = scan.max_bucket;
  rep.b4_max_gap = scan.b4_max_gap;
  rep.b4_ok = scan.b4_max_gap <= consts.b_delta && scan.max_bucket <= consts.b_s;
  return rep;
}

}  // namespace crwrap
