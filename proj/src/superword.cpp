#include "crwrap/superword.hpp"

#include <algorithm>
#include <sstream>

#include "crwrap/subword.hpp"

namespace crwrap {

namespace {

struct Builder {
  const WrappedAlgorithm& alg;
  const CrashStopAlgorithm& core;
  CrashStopRun cs;
  std::string failure;

  explicit Builder(const WrappedAlgorithm& a) : alg(a), core(a.core()) {}

  bool fail(const std::string& why) {
    if (failure.empty()) failure = why;
    return false;
  }

  // Appends one crash-stop step for process p; verifies delivery against the
  // in-flight set and message uniqueness on the way.
  bool append_step(ProcessId p, const Rmsg& rmsg, const FdOutput& fdo) {
    CrashStopConfig next = cs.configs.back();
    if (rmsg) {
      MsgTriple t{p, rmsg->sender, rmsg->m};
      auto it = std::find(next.in_flight.begin(), next.in_flight.end(), t);
      if (it == next.in_flight.end())
        return fail("delivered payload was not in flight: " + to_string(rmsg->m) +
                    " from " + std::to_string(rmsg->sender) + " to " + std::to_string(p));
      next.in_flight.erase(it);
    }
    LocalCoreState st2 = core.next(next.s[p - 1], rmsg, fdo);
    for (const auto& [dest, m] : core.send(st2)) {
      MsgTriple t{dest, p, m};
      if (std::find(next.in_flight.begin(), next.in_flight.end(), t) !=
          next.in_flight.end())
        return fail("message re-entered flight: " + to_string(m));
      next.in_flight.push_back(t);
    }
    next.s[p - 1] = CrashStopAlgorithm::drained(st2);
    cs.labels.push_back(CrashStopLabel{p, rmsg, {}, fdo});
    cs.configs.push_back(std::move(next));
    return true;
  }

  // A do-nothing step, used when a wrapped step froze every process but the
  // trace still gained a letter. Needs some process whose empty-handed step
  // is a fixpoint.
  bool append_stutter() {
    const auto& g = cs.configs.back().s;
    for (std::size_t k = 0; k < g.size(); ++k) {
      LocalCoreState st2 = core.next(g[k], std::nullopt, {});
      if (CrashStopAlgorithm::drained(st2) == g[k] && core.send(st2).empty())
        return append_step(static_cast<ProcessId>(k + 1), std::nullopt, {});
    }
    return fail("no process admits a stuttering step (all states are pre-start)");
  }
};

}  // namespace

SuperwordCertificate reconstruct_superword(const CRRun& cr, const WrappedAlgorithm& alg) {
  SuperwordCertificate cert;
  if (cr.configs.empty() || cr.configs.size() != cr.labels.size() + 1) {
    cert.failure = "malformed crash-recovery run";
    return cert;
  }
  const int n = alg.n();

  Builder b(alg);
  CrashStopConfig c0;
  c0.s = cr_trace_letter(cr.configs[0]);
  b.cs.configs.push_back(std::move(c0));
  cert.embedding.push_back(0);

  bool built = true;
  for (std::size_t t = 0; t < cr.labels.size() && built; ++t) {
    const auto& before = cr.configs[t];
    const auto& label = cr.labels[t];
    const std::size_t mark = b.cs.configs.size();

    for (ProcessId p = 1; p <= n && built; ++p) {
      if (before.failed.count(p)) continue;
      const auto& ws = before.s[p - 1];
      const auto& row = label.rmsgs[p - 1];
      const auto plan = alg.classify(ws, row);
      if (plan.kind == WrappedAlgorithm::StepPlan::Frozen) continue;
      const FdOutput fdo = silent_set(row, n);

      if (plan.kind == WrappedAlgorithm::StepPlan::ShortCircuit) {
        const Message dm = *row.at(plan.decide_from).payload;
        built = b.append_step(p, ReceivedMessage{plan.decide_from, dm}, fdo);
        continue;
      }

      UnfoldTrace u = alg.unfold(p, ws, row);
      for (const auto& step : u.steps) {
        built = b.append_step(p, step.label.rmsg, step.label.fdo);
        if (!built) break;
      }
    }
    if (!built) break;

    if (b.cs.configs.size() == mark) built = b.append_stutter();
    if (!built) break;

    // The serialized fragments must land exactly on the next wrapped letter.
    const GlobalState want = cr_trace_letter(cr.configs[t + 1]);
    if (!(b.cs.configs.back().s == want)) {
      built = b.fail("reconstruction diverged from the wrapped run at step " +
                     std::to_string(t));
      break;
    }
    cert.embedding.push_back(b.cs.configs.size() - 1);
  }

  cert.cs_run = std::move(b.cs);
  cert.failure = b.failure;
  if (!built) return cert;

  // P1: subword with pinned endpoints, re-checked from scratch.
  const StateTrace cr_trace = trace_of_cr_run(cr);
  const StateTrace cs_trace = trace_of_cs_run(cert.cs_run);
  cert.p1 = is_subword(cr_trace, cs_trace) && cr_trace.front() == cs_trace.front() &&
            cr_trace.back() == cs_trace.back() &&
            cert.embedding.size() == cr_trace.size();
  for (std::size_t k = 0; cert.p1 && k < cr_trace.size(); ++k) {
    cert.p1 = cert.embedding[k] < cs_trace.size() &&
              cr_trace[k] == cs_trace[cert.embedding[k]] &&
              (k == 0 || cert.embedding[k - 1] < cert.embedding[k]);
  }
  if (!cert.p1 && cert.failure.empty()) cert.failure = "subword embedding failed";

  cert.p2 = true;
  for (const auto& cfg : cert.cs_run.configs) cert.p2 = cert.p2 && cfg.failed.empty();
  for (const auto& l : cert.cs_run.labels) cert.p2 = cert.p2 && l.fails.empty();
  if (!cert.p2 && cert.failure.empty()) cert.failure = "failures leaked into the reconstruction";

  // P3: final in-flight set == buffered-but-never-delivered messages.
  {
    std::set<MsgTriple> flight(cert.cs_run.configs.back().in_flight.begin(),
                               cert.cs_run.configs.back().in_flight.end());
    std::set<MsgTriple> pending;
    const auto& last = cr.configs.back();
    for (ProcessId p = 1; p <= n; ++p)
      for (ProcessId q = 1; q <= n; ++q)
        for (const Message& m : last.s[p - 1].buff[q - 1])
          if (!last.s[q - 1].seen[p - 1].count(m)) pending.insert(MsgTriple{q, p, m});
    cert.p3 = flight == pending;
    if (!cert.p3 && cert.failure.empty()) {
      std::ostringstream os;
      os << "buffer/in-flight mismatch: " << flight.size() << " in flight vs "
         << pending.size() << " pending";
      cert.failure = os.str();
    }
  }

  auto v = cs_run_valid(cert.cs_run, alg.core(), kUnreliableFd);
  cert.cs_valid = v.ok;
  if (!v.ok && cert.failure.empty())
    cert.failure = "reconstruction invalid: " + to_string(v.violation->kind) + " at step " +
                   std::to_string(v.violation->step);
  return cert;
}

ViolationLocalization localize_violation(const Violation& v,
                                         const SuperwordCertificate& cert) {
  ViolationLocalization out;
  out.core_violation = v;
  if (cert.embedding.empty()) {
    out.note = "no embedding available";
    return out;
  }
  auto map_index = [&](long i) -> long {
    if (i < 1) return 1;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(i - 1),
                                                cert.embedding.size() - 1);
    return static_cast<long>(cert.embedding[k]) + 1;
  };
  out.core_violation.i = map_index(v.i);
  if (v.j > 0) out.core_violation.j = map_index(v.j);
  out.mapped = true;
  out.note = "witness mapped through the superword embedding";
  return out;
}

DetourResult check_detour_instance(const StateTrace& u, const StateTrace& w, Property prop) {
  auto violates = [&](const StateTrace& t) -> bool {
    switch (prop) {
      case Property::Validity: return check_validity(t).has_value();
      case Property::Integrity: return check_integrity(t).has_value();
      case Property::Agreement: return check_agreement(t).has_value();
      case Property::Invariant: return false;
    }
    return false;
  };
  if (prop == Property::Invariant)
    return {DetourOutcome::PreconditionFailed, "instance checking covers the named consensus properties"};
  if (u.empty() || w.empty() || !(u.front() == w.front()))
    return {DetourOutcome::PreconditionFailed, "initial letters differ"};
  if (!violates(u)) return {DetourOutcome::PreconditionFailed, "u does not violate the property"};
  if (!is_subword(u, w)) return {DetourOutcome::PreconditionFailed, "u is not a subword of w"};
  if (violates(w)) return {DetourOutcome::Irreparable, ""};
  return {DetourOutcome::Repaired, "superword satisfies the property; checker stack is broken"};
}

}  // namespace crwrap
