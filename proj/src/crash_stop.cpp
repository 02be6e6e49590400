#include "crwrap/crash_stop.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace crwrap {

std::string to_string(CsViolationKind k) {
  switch (k) {
    case CsViolationKind::FailedProcessStepped: return "FailedProcessStepped";
    case CsViolationKind::MessageNotInFlight: return "MessageNotInFlight";
    case CsViolationKind::FailureSetShrank: return "FailureSetShrank";
    case CsViolationKind::DuplicateMessage: return "DuplicateMessage";
    case CsViolationKind::MalformedRun: return "MalformedRun";
    case CsViolationKind::BadInitialState: return "BadInitialState";
    case CsViolationKind::ResilienceExceeded: return "ResilienceExceeded";
    case CsViolationKind::DetectorInconsistent: return "DetectorInconsistent";
    case CsViolationKind::StateMismatch: return "StateMismatch";
  }
  return "?";
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool in_flight_contains(const std::vector<MsgTriple>& m, const MsgTriple& t) {
  return std::find(m.begin(), m.end(), t) != m.end();
}

}  // namespace

CsStepResult cs_apply_step(const CrashStopConfig& c, const CrashStopLabel& l,
                           const CrashStopAlgorithm& alg) {
  if (l.p < 1 || l.p > alg.n())
    return CsViolation{CsViolationKind::MalformedRun, -1, "process id out of range"};
  if (c.failed.count(l.p))
    return CsViolation{CsViolationKind::FailedProcessStepped, -1,
                       "process " + std::to_string(l.p) + " is failed"};

  CrashStopConfig next = c;
  if (l.rmsg) {
    MsgTriple t{l.p, l.rmsg->sender, l.rmsg->m};
    auto it = std::find(next.in_flight.begin(), next.in_flight.end(), t);
    if (it == next.in_flight.end())
      return CsViolation{CsViolationKind::MessageNotInFlight, -1,
                         "received " + to_string(l.rmsg->m) + " from " +
                             std::to_string(l.rmsg->sender) + " not in flight"};
    next.in_flight.erase(it);
  }

  LocalCoreState s2 = alg.next(c.s[l.p - 1], l.rmsg, l.fdo);
  for (const auto& [dest, m] : alg.send(s2)) {
    MsgTriple t{dest, l.p, m};
    if (in_flight_contains(next.in_flight, t))
      return CsViolation{CsViolationKind::DuplicateMessage, -1,
                         "re-sent " + to_string(m) + " to " + std::to_string(dest)};
    next.in_flight.push_back(t);
  }
  next.s[l.p - 1] = CrashStopAlgorithm::drained(s2);

  if (!std::includes(l.fails.begin(), l.fails.end(), c.failed.begin(), c.failed.end()))
    return CsViolation{CsViolationKind::FailureSetShrank, -1, "fails dropped a failed process"};
  next.failed = l.fails;
  return next;
}

FdOutput FdEmulator::output(long step, const std::set<ProcessId>& failed, int n) const {
  if (gst != kUnreliableFd && step >= gst) return failed;
  FdOutput out;
  std::uint64_t bits = mix64(mix64(seed ^ 0x5d1fdUL) ^ static_cast<std::uint64_t>(step));
  for (int p = 1; p <= n; ++p)
    if ((bits >> (p - 1)) & 1) out.insert(p);
  return out;
}

CsValidation cs_run_valid(const CrashStopRun& run, const CrashStopAlgorithm& alg, long gst) {
  auto fail = [](CsViolationKind k, long step, std::string d) {
    return CsValidation{false, CsViolation{k, step, std::move(d)}};
  };
  if (run.configs.empty())
    return fail(CsViolationKind::MalformedRun, -1, "no configurations");
  if (run.configs.size() != run.labels.size() + 1)
    return fail(CsViolationKind::MalformedRun, -1, "configuration/label counts disagree");

  const auto inits = alg.initial_states();
  if (std::find(inits.begin(), inits.end(), run.configs[0].s) == inits.end())
    return fail(CsViolationKind::BadInitialState, 0, "initial state not allowed");

  // Triples already delivered or still flying; re-sending any of them breaks
  // the once-per-execution message discipline.
  std::set<MsgTriple> ever_sent(run.configs[0].in_flight.begin(),
                                run.configs[0].in_flight.end());

  for (std::size_t i = 0; i < run.labels.size(); ++i) {
    const auto& c = run.configs[i];
    const auto& l = run.labels[i];
    if (static_cast<long>(c.failed.size()) > alg.n_f())
      return fail(CsViolationKind::ResilienceExceeded, static_cast<long>(i),
                  "too many failures");
    if (gst != kUnreliableFd && static_cast<long>(i) >= gst && l.fdo != c.failed)
      return fail(CsViolationKind::DetectorInconsistent, static_cast<long>(i),
                  "detector output differs from failed set after gst");
    CsStepResult r = cs_apply_step(c, l, alg);
    if (const auto* v = std::get_if<CsViolation>(&r)) {
      CsViolation vv = *v;
      vv.step = static_cast<long>(i);
      return CsValidation{false, vv};
    }
    const auto& expect = std::get<CrashStopConfig>(r);
    if (!(expect == run.configs[i + 1]))
      return fail(CsViolationKind::StateMismatch, static_cast<long>(i),
                  "recorded successor differs from applied step");
    for (const auto& t : run.configs[i + 1].in_flight) {
      if (in_flight_contains(c.in_flight, t)) continue;  // carried over
      if (!ever_sent.insert(t).second)
        return fail(CsViolationKind::DuplicateMessage, static_cast<long>(i),
                    "message sent twice during the execution");
    }
  }
  const auto& last = run.configs.back();
  if (static_cast<long>(last.failed.size()) > alg.n_f())
    return fail(CsViolationKind::ResilienceExceeded,
                static_cast<long>(run.labels.size()), "too many failures");
  return CsValidation{};
}

namespace {

// Oldest in-flight message addressed to p, if any.
Rmsg pick_delivery(const CrashStopConfig& c, ProcessId p) {
  for (const auto& t : c.in_flight)
    if (t.receiver == p) return ReceivedMessage{t.sender, t.m};
  return std::nullopt;
}

void schedule_steps(CrashStopRun& run, const CrashStopAlgorithm& alg, const FdEmulator& fd,
                    long from_step, long steps, const std::vector<CrashPlanEntry>& plan,
                    ProcessId cursor_start) {
  ProcessId cursor = cursor_start;
  const int n = alg.n();
  for (long k = 0; k < steps; ++k) {
    const long step = from_step + k;
    CrashStopConfig c = run.configs.back();

    std::set<ProcessId> fails = c.failed;
    for (const auto& e : plan)
      if (e.step == step) fails.insert(e.p);

    // Round-robin over processes alive at the start of the step.
    ProcessId p = 0;
    for (int tries = 0; tries < n; ++tries) {
      ProcessId cand = (cursor - 1 + 1 + tries) % n + 1;
      if (!c.failed.count(cand)) {
        p = cand;
        break;
      }
    }
    if (p == 0) break;  // everyone failed; nothing can step
    cursor = p;

    CrashStopLabel l;
    l.p = p;
    l.rmsg = pick_delivery(c, p);
    l.fails = fails;
    l.fdo = fd.output(step, c.failed, n);

    CsStepResult r = cs_apply_step(c, l, alg);
    if (std::holds_alternative<CsViolation>(r))
      throw std::logic_error("scheduler produced an invalid step: " +
                             std::get<CsViolation>(r).detail);
    run.labels.push_back(std::move(l));
    run.configs.push_back(std::get<CrashStopConfig>(r));
  }
}

}  // namespace

CrashStopRun cs_fair_scheduler(const CrashStopAlgorithm& alg, std::uint64_t seed,
                               long horizon, const std::vector<CrashPlanEntry>& crash_plan,
                               long gst) {
  const auto inits = alg.initial_states();
  if (inits.empty()) throw std::invalid_argument("algorithm has no initial states");
  CrashStopRun run;
  CrashStopConfig c0;
  c0.s = inits[mix64(seed) % inits.size()];
  run.configs.push_back(std::move(c0));
  FdEmulator fd{gst, seed};
  schedule_steps(run, alg, fd, 0, horizon, crash_plan, alg.n());
  return run;
}

CrashStopRun extend_reliable(const CrashStopRun& run, const CrashStopAlgorithm& alg,
                             long extra_steps, std::uint64_t seed, long gst) {
  auto v = cs_run_valid(run, alg, gst);
  if (!v.ok) throw std::invalid_argument("refusing to extend an invalid run");
  CrashStopRun out = run;
  ProcessId cursor = out.labels.empty() ? alg.n() : out.labels.back().p;
  FdEmulator fd{gst, seed};
  schedule_steps(out, alg, fd, static_cast<long>(out.labels.size()), extra_steps, {}, cursor);
  return out;
}

StateTrace trace_of_cs_run(const CrashStopRun& run) {
  if (run.configs.empty()) throw std::invalid_argument("empty run");
  if (run.configs.size() != run.labels.size() + 1)
    throw std::invalid_argument("malformed alternation");
  StateTrace t;
  t.reserve(run.configs.size());
  for (const auto& c : run.configs) t.push_back(c.s);
  return t;
}

}  // namespace crwrap
