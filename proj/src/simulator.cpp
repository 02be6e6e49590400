#include "crwrap/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace crwrap {

CRLabel sample_label(const CRConfig& c, const ProbModel& pm, const Rng& rng,
                     const WrappedAlgorithm& alg) {
  const int n = alg.n();
  CRLabel l;
  l.rmsgs.resize(n);
  for (ProcessId p = 1; p <= n; ++p) {
    if (c.failed.count(p)) continue;  // failed receivers get canonical empty rows
    for (ProcessId q = 1; q <= n; ++q) {
      if (c.failed.count(q)) continue;
      const double u = rng.uniform(Rng::channel_stream(p, q, n),
                                   static_cast<std::uint64_t>(c.n));
      if (u < pm.net(p, q, c.n)) l.rmsgs[p - 1][q] = alg.send_to(c.s[q - 1], p);
    }
  }
  for (ProcessId p = 1; p <= n; ++p) {
    const double u = rng.uniform(Rng::fail_stream(p, n),
                                 static_cast<std::uint64_t>(c.n + 1));
    if (u >= pm.fp(p, c.n + 1)) l.fails.insert(p);
  }
  return l;
}

CRConfig initial_config(const ProbModel& pm, const WrappedAlgorithm& alg, const Rng& rng) {
  const auto inits = alg.initial_states();
  const std::size_t idx = static_cast<std::size_t>(
      rng.uniform(Rng::init_state_stream(), 0) * static_cast<double>(inits.size()));
  CRConfig c;
  c.n = 0;
  c.s = inits[std::min(idx, inits.size() - 1)];
  for (ProcessId p = 1; p <= alg.n(); ++p) {
    const double u = rng.uniform(Rng::init_fail_stream(p), 0);
    if (u >= pm.fp(p, 0)) c.failed.insert(p);
  }
  return c;
}

std::vector<std::pair<CRConfig, double>> initial_distribution(const ProbModel& pm,
                                                              const WrappedAlgorithm& alg) {
  const auto inits = alg.initial_states();
  const int n = alg.n();
  std::vector<std::pair<CRConfig, double>> out;
  for (const auto& s : inits) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      CRConfig c;
      c.n = 0;
      c.s = s;
      double pr = 1.0 / static_cast<double>(inits.size());
      for (ProcessId p = 1; p <= n; ++p) {
        const double up = pm.fp(p, 0);
        if ((mask >> (p - 1)) & 1) {
          c.failed.insert(p);
          pr *= 1.0 - up;
        } else {
          pr *= up;
        }
      }
      out.emplace_back(std::move(c), pr);
    }
  }
  return out;
}

namespace {

void check_enumerable(const ProbModel& pm) {
  if (pm.n > 4)
    throw EnumerationTooLarge("transition enumeration refused: n = " +
                              std::to_string(pm.n) + " exceeds the supported 4; label "
                              "space has 2^(n*n) message rows per step");
}

std::vector<ProcessId> live_processes(const CRConfig& c, int n) {
  std::vector<ProcessId> live;
  for (ProcessId p = 1; p <= n; ++p)
    if (!c.failed.count(p)) live.push_back(p);
  return live;
}

struct ReceiverOutcome {
  WrappedState state;
  double prob;
};

// Distribution of receiver p's successor state over all subsets of delivered
// live senders. Rows are independent across receivers, which is what makes
// the factorization exact.
std::vector<ReceiverOutcome> receiver_outcomes(const CRConfig& c, ProcessId p,
                                               const std::vector<ProcessId>& live,
                                               const ProbModel& pm,
                                               const WrappedAlgorithm& alg) {
  std::vector<ReceiverOutcome> out;
  const std::size_t k = live.size();
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    WrappedRmsgs row;
    double pr = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      const ProcessId q = live[j];
      const double d = pm.net(p, q, c.n);
      if ((mask >> j) & 1) {
        row[q] = alg.send_to(c.s[q - 1], p);
        pr *= d;
      } else {
        pr *= 1.0 - d;
      }
    }
    WrappedState ns = alg.next(p, c.s[p - 1], row);
    bool merged = false;
    for (auto& o : out) {
      if (o.state == ns) {
        o.prob += pr;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(ReceiverOutcome{std::move(ns), pr});
  }
  return out;
}

double fails_factor(const CRConfig& c, const std::set<ProcessId>& fails,
                    const ProbModel& pm, int n) {
  double pr = 1.0;
  for (ProcessId p = 1; p <= n; ++p) {
    const double up = pm.fp(p, c.n + 1);
    pr *= fails.count(p) ? (1.0 - up) : up;
  }
  return pr;
}

}  // namespace

std::vector<std::pair<CRConfig, double>> next_distribution(const CRConfig& c,
                                                           const ProbModel& pm,
                                                           const WrappedAlgorithm& alg) {
  check_enumerable(pm);
  const int n = alg.n();
  const auto live = live_processes(c, n);

  // Per-receiver successor distributions; failed receivers keep their state.
  std::vector<std::vector<ReceiverOutcome>> dists;
  for (ProcessId p = 1; p <= n; ++p) {
    if (c.failed.count(p)) {
      dists.push_back({ReceiverOutcome{c.s[p - 1], 1.0}});
    } else {
      dists.push_back(receiver_outcomes(c, p, live, pm, alg));
    }
  }

  std::vector<std::pair<GlobalWrappedState, double>> states{{GlobalWrappedState{}, 1.0}};
  for (const auto& d : dists) {
    std::vector<std::pair<GlobalWrappedState, double>> grown;
    for (const auto& [prefix, pr] : states) {
      for (const auto& o : d) {
        GlobalWrappedState g = prefix;
        g.push_back(o.state);
        double p2 = pr * o.prob;
        bool merged = false;
        for (auto& [eg, ep] : grown) {
          if (eg == g) {
            ep += p2;
            merged = true;
            break;
          }
        }
        if (!merged) grown.emplace_back(std::move(g), p2);
      }
    }
    states = std::move(grown);
  }

  std::vector<std::pair<CRConfig, double>> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::set<ProcessId> fails;
    for (ProcessId p = 1; p <= n; ++p)
      if ((mask >> (p - 1)) & 1) fails.insert(p);
    const double ff = fails_factor(c, fails, pm, n);
    for (const auto& [g, pr] : states) {
      CRConfig c2;
      c2.n = c.n + 1;
      c2.s = g;
      c2.failed = fails;
      bool merged = false;
      for (auto& [ec, ep] : out) {
        if (ec == c2) {
          ep += pr * ff;
          merged = true;
          break;
        }
      }
      if (!merged) out.emplace_back(std::move(c2), pr * ff);
    }
  }
  return out;
}

double trans_prob(const CRConfig& c, const CRConfig& c2, const ProbModel& pm,
                  const WrappedAlgorithm& alg) {
  check_enumerable(pm);
  const int n = alg.n();
  if (c2.n != c.n + 1) return 0.0;
  const auto live = live_processes(c, n);

  double pr = fails_factor(c, c2.failed, pm, n);
  for (ProcessId p = 1; p <= n && pr > 0.0; ++p) {
    if (c.failed.count(p)) {
      if (!(c2.s[p - 1] == c.s[p - 1])) return 0.0;
      continue;
    }
    double match = 0.0;
    for (const auto& o : receiver_outcomes(c, p, live, pm, alg))
      if (o.state == c2.s[p - 1]) match += o.prob;
    pr *= match;
  }
  return pr;
}

CrExecutor::CrExecutor(const WrappedAlgorithm& alg, const ProbModel& pm, std::uint64_t seed)
    : alg_(alg), pm_(pm), rng_{seed}, config_(initial_config(pm, alg, rng_)) {}

void CrExecutor::step() {
  label_ = sample_label(config_, pm_, rng_, alg_);
  CrStepResult r = cr_apply(config_, label_, alg_);
  // Sampled labels are valid by construction.
  config_ = std::get<CRConfig>(std::move(r));
}

bool CrExecutor::all_decided(const std::set<ProcessId>& scope) const {
  if (scope.empty()) {
    for (const auto& ws : config_.s)
      if (!ws.st.dec) return false;
    return true;
  }
  for (ProcessId p : scope)
    if (!config_.s[p - 1].st.dec) return false;
  return true;
}

CRRun run_cr(const WrappedAlgorithm& alg, const ProbModel& pm, std::uint64_t seed,
             const RunOptions& opts) {
  CrExecutor ex(alg, pm, seed);
  CRRun run;
  run.configs.push_back(ex.config());
  for (long i = 0; i < opts.horizon; ++i) {
    if (opts.stop_on_all_decided && ex.all_decided(opts.decide_scope)) break;
    ex.step();
    run.labels.push_back(ex.last_label());
    run.configs.push_back(ex.config());
  }
  return run;
}

std::vector<long> detect_stable_periods(const CRRun& run, long delta, const SelectionFn& sel) {
  std::vector<long> starts;
  if (delta < 1 || run.configs.empty()) return starts;
  const long last = static_cast<long>(run.configs.size()) - 1;
  const int n = static_cast<int>(run.configs[0].s.size());
  for (long i = 0; i + delta + 1 <= last; ++i) {
    const std::set<ProcessId> c_set = sel(run.configs[i]);
    std::set<ProcessId> expect_failed;
    for (ProcessId p = 1; p <= n; ++p)
      if (!c_set.count(p)) expect_failed.insert(p);

    bool ok = true;
    for (long j = i + 1; ok && j <= i + delta + 1; ++j)
      ok = run.configs[j].failed == expect_failed;
    for (long j = i + 1; ok && j <= i + delta; ++j) {
      const CRLabel& l = run.labels[j];
      for (ProcessId p : c_set) {
        for (ProcessId q : c_set) {
          if (!l.rmsgs[p - 1].count(q)) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
      }
    }
    if (ok) starts.push_back(i);
  }
  return starts;
}

double stable_window_prob(const CRConfig& c, const std::set<ProcessId>& correct,
                          long delta, const ProbModel& pm, const WrappedAlgorithm& alg) {
  const int n = alg.n();
  auto fails_part = [&](long t) {
    double pr = 1.0;
    for (ProcessId p = 1; p <= n; ++p) {
      const double up = pm.fp(p, t);
      pr *= correct.count(p) ? up : (1.0 - up);
    }
    return pr;
  };

  // Entry transition constrains only the failure pattern; its deliveries
  // marginalize out. Each in-window transition additionally forces delivery
  // on every channel inside `correct`. Delivery probabilities depend only on
  // step numbers, so no state has to be evolved here.
  double pr = fails_part(c.n + 1);
  for (long k = 1; k <= delta; ++k) {
    const long t = c.n + k;
    for (ProcessId p : correct)
      for (ProcessId q : correct) pr *= pm.net(p, q, t);
    pr *= fails_part(t + 1);
  }
  return pr;
}

}  // namespace crwrap
