#include "crwrap/cr_model.hpp"

#include <stdexcept>

namespace crwrap {

std::string to_string(CrViolationKind k) {
  switch (k) {
    case CrViolationKind::MessageContentMismatch: return "MessageContentMismatch";
    case CrViolationKind::FailedSenderDelivered: return "FailedSenderDelivered";
    case CrViolationKind::MalformedLabel: return "MalformedLabel";
  }
  return "?";
}

CrStepResult cr_apply(const CRConfig& c, const CRLabel& l, const WrappedAlgorithm& alg) {
  const int n = alg.n();
  if (static_cast<int>(l.rmsgs.size()) != n || static_cast<int>(c.s.size()) != n)
    return CrViolation{CrViolationKind::MalformedLabel, "label/config arity mismatch"};

  for (ProcessId p = 1; p <= n; ++p) {
    for (const auto& [q, wm] : l.rmsgs[p - 1]) {
      if (q < 1 || q > n)
        return CrViolation{CrViolationKind::MalformedLabel, "sender out of range"};
      if (c.failed.count(q))
        return CrViolation{CrViolationKind::FailedSenderDelivered,
                           "message from failed process " + std::to_string(q)};
      if (!(wm == alg.send_to(c.s[q - 1], p)))
        return CrViolation{CrViolationKind::MessageContentMismatch,
                           "channel " + std::to_string(q) + "->" + std::to_string(p) +
                               " does not carry the sent step message"};
    }
  }

  CRConfig out;
  out.n = c.n + 1;
  out.failed = l.fails;
  out.s = c.s;
  for (ProcessId p = 1; p <= n; ++p)
    if (!c.failed.count(p)) out.s[p - 1] = alg.next(p, c.s[p - 1], l.rmsgs[p - 1]);
  return out;
}

std::vector<CRConfig> wrapped_init(const WrappedAlgorithm& alg) {
  std::vector<CRConfig> out;
  const int n = alg.n();
  for (const auto& gw : alg.initial_states()) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      CRConfig c;
      c.n = 0;
      c.s = gw;
      for (ProcessId p = 1; p <= n; ++p)
        if ((mask >> (p - 1)) & 1) c.failed.insert(p);
      out.push_back(std::move(c));
    }
  }
  return out;
}

GlobalState cr_trace_letter(const CRConfig& c) {
  GlobalState g;
  g.reserve(c.s.size());
  for (const auto& ws : c.s) g.push_back(ws.st);
  return g;
}

StateTrace trace_of_cr_run(const CRRun& run) {
  if (run.configs.empty()) throw std::invalid_argument("empty run");
  if (run.configs.size() != run.labels.size() + 1)
    throw std::invalid_argument("malformed alternation");
  StateTrace t;
  t.reserve(run.configs.size());
  for (const auto& c : run.configs) t.push_back(cr_trace_letter(c));
  return t;
}

static void hash_message(StableHash& h, const Message& m) { h.u64(digest(m)); }

std::uint64_t digest(const CRConfig& c) {
  StableHash h;
  h.i64(c.n);
  for (ProcessId p : c.failed) h.i64(p);
  for (const auto& ws : c.s) {
    h.u64(payload_digest(ws.st));
    for (const auto& b : ws.buff) {
      h.u64(b.size());
      for (const auto& m : b) hash_message(h, m);
    }
    for (const auto& a : ws.acks) {
      h.u64(a.has_value());
      if (a) hash_message(h, *a);
    }
    for (const auto& sset : ws.seen) {
      h.u64(sset.size());
      for (const auto& m : sset) hash_message(h, m);
    }
  }
  return h.state;
}

std::uint64_t digest(const CRLabel& l) {
  StableHash h;
  for (const auto& row : l.rmsgs) {
    h.u64(row.size());
    for (const auto& [q, wm] : row) {
      h.i64(q);
      h.u64(wm.payload.has_value());
      if (wm.payload) hash_message(h, *wm.payload);
      h.u64(wm.ack.has_value());
      if (wm.ack) hash_message(h, *wm.ack);
    }
  }
  for (ProcessId p : l.fails) h.i64(p);
  return h.state;
}

}  // namespace crwrap
