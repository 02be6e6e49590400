#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "crwrap/algorithm.hpp"
#include "crwrap/cr_model.hpp"
#include "crwrap/ct.hpp"
#include "crwrap/simulator.hpp"
#include "crwrap/trace_io.hpp"

using namespace crwrap;

namespace {

CRConfig blank_config(const WrappedAlgorithm& walg, std::set<ProcessId> failed = {}) {
  CRConfig c;
  c.n = 0;
  c.s = walg.initial_states()[0];
  c.failed = std::move(failed);
  return c;
}

// Window detection re-coded from the definition, quadratically and without
// any of the production shortcuts.
std::vector<long> stable_periods_naive(const CRRun& run, long delta,
                                       const SelectionFn& sel) {
  std::vector<long> out;
  const long last = static_cast<long>(run.configs.size()) - 1;
  const int n = static_cast<int>(run.configs[0].s.size());
  for (long i = 0; i + delta + 1 <= last; ++i) {
    const auto c_set = sel(run.configs[i]);
    bool ok = true;
    for (long j = i + 1; j <= i + delta + 1 && ok; ++j) {
      for (ProcessId p = 1; p <= n; ++p) {
        const bool should_fail = !c_set.count(p);
        if (run.configs[j].failed.count(p) != static_cast<std::size_t>(should_fail))
          ok = false;
      }
    }
    for (long j = i + 1; j <= i + delta && ok; ++j)
      for (ProcessId p : c_set)
        for (ProcessId q : c_set)
          if (!run.labels[j].rmsgs[p - 1].count(q)) ok = false;
    if (ok) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST_CASE("cr_apply moves live processes and freezes failed ones") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);

  SUBCASE("everyone failed: states persist, the step counter ticks") {
    auto c = blank_config(walg, {1, 2});
    CRLabel l;
    l.rmsgs.resize(2);
    l.fails = {1, 2};
    auto r = cr_apply(c, l, walg);
    const auto& c2 = std::get<CRConfig>(r);
    CHECK(c2.n == 1);
    CHECK(c2.s == c.s);
    CHECK(c2.failed == c.failed);
  }
  SUBCASE("messages from failed senders are rejected") {
    auto c = blank_config(walg, {2});
    CRLabel l;
    l.rmsgs.resize(2);
    l.rmsgs[0][2] = WrappedMessage{};
    auto r = cr_apply(c, l, walg);
    REQUIRE(std::holds_alternative<CrViolation>(r));
    CHECK(std::get<CrViolation>(r).kind == CrViolationKind::FailedSenderDelivered);
  }
  SUBCASE("forged payloads are rejected") {
    auto c = blank_config(walg);
    CRLabel l;
    l.rmsgs.resize(2);
    l.rmsgs[0][2] = WrappedMessage{Message{msg::kPing, 1, 9, 0}, std::nullopt};
    auto r = cr_apply(c, l, walg);
    REQUIRE(std::holds_alternative<CrViolation>(r));
    CHECK(std::get<CrViolation>(r).kind == CrViolationKind::MessageContentMismatch);
  }
  SUBCASE("full delivery steps both processes with an empty suspicion set") {
    auto c = blank_config(walg);
    CRLabel l;
    l.rmsgs.resize(2);
    for (ProcessId p = 1; p <= 2; ++p)
      for (ProcessId q = 1; q <= 2; ++q)
        l.rmsgs[p - 1][q] = walg.send_to(c.s[q - 1], p);
    auto r = cr_apply(c, l, walg);
    const auto& c2 = std::get<CRConfig>(r);
    CHECK(c2.n == 1);
    CHECK(c2.s == c.s);  // null algorithm: no movement, but rows were accepted
  }
}

TEST_CASE("sampled labels are deterministic in the seed and configuration") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::standard(2, ProbFamily::constant(0.5), ProbFamily::constant(0.9),
                                0.25, 0.05);
  auto c = blank_config(walg);
  Rng rng{12345};
  auto a = sample_label(c, pm, rng, walg);
  auto b = sample_label(c, pm, rng, walg);
  CHECK(a == b);
}

TEST_CASE("degenerate probabilities give full delivery and no failures") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::unchecked(2, ProbFamily::constant(1.0), ProbFamily::constant(1.0));
  auto c = blank_config(walg);
  Rng rng{7};
  auto l = sample_label(c, pm, rng, walg);
  CHECK(l.fails.empty());
  for (ProcessId p = 1; p <= 2; ++p) CHECK(l.rmsgs[p - 1].size() == 2);
}

TEST_CASE("sampling frequencies match the declared parameters") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::standard(2, ProbFamily::constant(0.5), ProbFamily::constant(0.9),
                                0.25, 0.05);
  auto c = blank_config(walg);
  const long samples = 100000;
  long delivered = 0, fails = 0;
  for (long s = 0; s < samples; ++s) {
    Rng rng{static_cast<std::uint64_t>(s)};
    auto l = sample_label(c, pm, rng, walg);
    if (l.rmsgs[0].count(2)) ++delivered;
    if (l.fails.count(1)) ++fails;
  }
  CHECK(std::abs(delivered / double(samples) - 0.5) < 0.01);
  CHECK(std::abs(fails / double(samples) - 0.1) < 0.01);
}

TEST_CASE("single-process transition probability collapses delivery outcomes") {
  auto alg = make_null_algorithm(1);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::standard(1, ProbFamily::constant(0.5), ProbFamily::constant(0.9),
                                0.25, 0.05);
  auto c = blank_config(walg);
  CRConfig up = c;
  up.n = 1;
  CRConfig down = up;
  down.failed = {1};
  // Both the delivered and the lost self-message lead to the same state.
  CHECK(trans_prob(c, up, pm, walg) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(trans_prob(c, down, pm, walg) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("one-step distributions sum to one everywhere reachable") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::standard(2, ProbFamily::constant(0.5), ProbFamily::constant(0.9),
                                0.25, 0.05);
  for (unsigned mask = 0; mask < 4; ++mask) {
    CRConfig c = blank_config(walg);
    for (ProcessId p = 1; p <= 2; ++p)
      if ((mask >> (p - 1)) & 1) c.failed.insert(p);
    for (long depth = 0; depth < 3; ++depth) {
      c.n = depth;
      double sum = 0.0;
      for (auto& [c2, pr] : next_distribution(c, pm, walg)) {
        sum += pr;
        CHECK(trans_prob(c, c2, pm, walg) == doctest::Approx(pr).epsilon(1e-12));
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("enumeration refuses oversized instances with a size report") {
  auto alg = make_null_algorithm(5);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::unchecked(5, ProbFamily::constant(0.5), ProbFamily::constant(0.9));
  auto c = blank_config(walg);
  CHECK_THROWS_WITH_AS(next_distribution(c, pm, walg), doctest::Contains("n = 5"),
                       EnumerationTooLarge);
}

TEST_CASE("initial configurations follow the product distribution") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::standard(2, ProbFamily::constant(0.5), ProbFamily::constant(0.9),
                                0.25, 0.05);
  const long samples = 100000;
  std::map<int, long> failed_count;
  for (long s = 0; s < samples; ++s) {
    Rng rng{static_cast<std::uint64_t>(s) * 31 + 1};
    auto c = initial_config(pm, walg, rng);
    CHECK(c.n == 0);
    int mask = 0;
    for (ProcessId p : c.failed) mask |= 1 << (p - 1);
    ++failed_count[mask];
  }
  auto dist = initial_distribution(pm, walg);
  REQUIRE(dist.size() == 4);
  for (auto& [c, pr] : dist) {
    int mask = 0;
    for (ProcessId p : c.failed) mask |= 1 << (p - 1);
    CHECK(std::abs(failed_count[mask] / double(samples) - pr) < 0.01);
  }
}

TEST_CASE("cylinder probabilities match sampled prefix frequencies") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::standard(2, ProbFamily::constant(0.5), ProbFamily::constant(0.9),
                                0.25, 0.05);

  // Fixed three-letter prefix: nobody failed at steps 0, 1, 2.
  CRConfig c0 = blank_config(walg);
  CRConfig c1 = c0, c2 = c0;
  c1.n = 1;
  c2.n = 2;
  double iota = 0.0;
  for (auto& [c, pr] : initial_distribution(pm, walg))
    if (c == c0) iota = pr;
  const double cyl = iota * trans_prob(c0, c1, pm, walg) * trans_prob(c1, c2, pm, walg);
  CHECK(cyl == doctest::Approx(0.81 * 0.81 * 0.81).epsilon(1e-9));

  const long samples = 1000000;
  long hits = 0;
  RunOptions opts;
  opts.horizon = 2;
  for (long s = 0; s < samples; ++s) {
    Rng rng{static_cast<std::uint64_t>(s) * 7 + 3};
    auto start = initial_config(pm, walg, rng);
    if (!(start == c0)) continue;
    CrExecutor ex(walg, pm, rng.seed);
    ex.step();
    if (!(ex.config() == c1)) continue;
    ex.step();
    if (ex.config() == c2) ++hits;
  }
  const double freq = hits / double(samples);
  const double se = std::sqrt(cyl * (1 - cyl) / samples);
  CHECK(std::abs(freq - cyl) <= 3 * se);
}

TEST_CASE("runs are reproducible and bounded") {
  auto alg = make_ct_algorithm(3);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::standard(3, ProbFamily::constant(0.9), ProbFamily::constant(0.9),
                                0.05, 0.05);
  SUBCASE("horizon zero stops at the initial configuration") {
    RunOptions opts;
    auto run = run_cr(walg, pm, 4, opts);
    CHECK(run.configs.size() == 1);
  }
  SUBCASE("identical seeds give identical runs") {
    RunOptions opts;
    opts.horizon = 40;
    auto a = run_cr(walg, pm, 11, opts);
    auto b = run_cr(walg, pm, 11, opts);
    CHECK(a.configs == b.configs);
    CHECK(a.labels == b.labels);
  }
  SUBCASE("step counters advance by one") {
    RunOptions opts;
    opts.horizon = 25;
    auto run = run_cr(walg, pm, 2, opts);
    for (std::size_t i = 0; i < run.configs.size(); ++i)
      CHECK(run.configs[i].n == static_cast<long>(i));
  }
  SUBCASE("benign wrapped ct decides quickly") {
    RunOptions opts;
    opts.horizon = 100000;
    opts.stop_on_all_decided = true;
    auto run = run_cr(walg, pm, 123, opts);
    for (const auto& ws : run.configs.back().s) CHECK(ws.st.dec.has_value());
    CHECK(run.configs.size() < 1000);
  }
}

TEST_CASE("stable period detection agrees with the naive recoding") {
  auto alg = make_null_algorithm(3);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::standard(3, ProbFamily::constant(0.6), ProbFamily::constant(0.7),
                                0.05, 0.05);
  SelectionFn up_set = [](const CRConfig& c) {
    std::set<ProcessId> s;
    for (ProcessId p = 1; p <= static_cast<ProcessId>(c.s.size()); ++p)
      if (!c.failed.count(p)) s.insert(p);
    return s;
  };
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RunOptions opts;
    opts.horizon = 30;
    auto run = run_cr(walg, pm, seed, opts);
    for (long delta : {1L, 2L, 3L})
      CHECK(detect_stable_periods(run, delta, up_set) ==
            stable_periods_naive(run, delta, up_set));
  }
}

TEST_CASE("a lossless always-up run is stable at every index") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::unchecked(2, ProbFamily::constant(1.0), ProbFamily::constant(1.0));
  RunOptions opts;
  opts.horizon = 10;
  auto run = run_cr(walg, pm, 0, opts);
  SelectionFn all = [](const CRConfig& c) {
    std::set<ProcessId> s;
    for (ProcessId p = 1; p <= static_cast<ProcessId>(c.s.size()); ++p) s.insert(p);
    return s;
  };
  auto starts = detect_stable_periods(run, 2, all);
  // window starts run from 0 through size - (delta + 2)
  CHECK(starts.size() == run.configs.size() - 3);
}

TEST_CASE("one lost in-window message disqualifies the window") {
  auto alg = make_null_algorithm(2);
  WrappedAlgorithm walg(alg);
  auto pm = ProbModel::unchecked(2, ProbFamily::constant(1.0), ProbFamily::constant(1.0));
  RunOptions opts;
  opts.horizon = 8;
  auto run = run_cr(walg, pm, 0, opts);
  SelectionFn all = [](const CRConfig&) { return std::set<ProcessId>{1, 2}; };
  auto before = detect_stable_periods(run, 1, all);
  // drop one delivery inside what was a window: with delta = 1 the only
  // window containing step 3 strictly inside starts at index 2
  run.labels[3].rmsgs[0].erase(2);
  auto after = detect_stable_periods(run, 1, all);
  CHECK(after.size() == before.size() - 1);
  CHECK(std::find(after.begin(), after.end(), 2L) == after.end());
}

TEST_CASE("stable-window probability clears the closed-form floor") {
  auto alg = make_null_algorithm(3, {}, 1);
  WrappedAlgorithm walg(alg);
  // Declared margins: eps_f = 0.1, eps_net = 0.5; actual parameters sit
  // inside them.
  auto pm = ProbModel::standard(3, ProbFamily::constant(0.6), ProbFamily::constant(0.5),
                                0.5, 0.1);
  const double eps_f = 0.1, eps_net = 0.5;
  const long delta = 1;
  const std::set<ProcessId> correct{1, 2};
  auto c = blank_config(walg);
  const double floor = std::pow(eps_f, 2) * std::pow(1 - eps_f, 1) *
                       std::pow(std::pow(eps_net, 4) * std::pow(eps_f, 2) * (1 - eps_f),
                                static_cast<double>(delta));
  CHECK(floor == doctest::Approx(5.0625e-6).epsilon(1e-6));
  const double window = stable_window_prob(c, correct, delta, pm, walg);
  CHECK(window > floor);
}

TEST_CASE("nastier availability hits zero from the cutoff on") {
  auto pm = ProbModel::nastier(3, ProbFamily::constant(0.9), ProbFamily::constant(0.9),
                               0.05, 0.05, {1, 2}, {{3, 50}});
  CHECK(pm.fp(3, 49) == doctest::Approx(0.9));
  CHECK(pm.fp(3, 50) == 0.0);
  CHECK(pm.fp(3, 1000) == 0.0);
  CHECK(pm.fp(1, 1000) == doctest::Approx(0.9));

  auto alg = make_null_algorithm(3);
  WrappedAlgorithm walg(alg);
  RunOptions opts;
  opts.horizon = 80;
  auto run = run_cr(walg, pm, 5, opts);
  for (const auto& c : run.configs)
    if (c.n >= 51) CHECK(c.failed.count(3));
}

TEST_CASE("probability model validation rejects broken bounds") {
  CHECK_THROWS_AS(ProbModel::standard(2, ProbFamily::constant(0.5),
                                      ProbFamily::constant(0.999), 0.25, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProbModel::standard(2, ProbFamily::constant(0.1),
                                      ProbFamily::constant(0.5), 0.2, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProbModel::nastier(2, ProbFamily::constant(0.5),
                                     ProbFamily::constant(0.5), 0.25, 0.25, {1}, {}),
                  std::invalid_argument);
  // schedules and sinusoids validate against their extremes
  CHECK_THROWS_AS(ProbModel::standard(2, ProbFamily::constant(0.5),
                                      ProbFamily::sinusoid(0.5, 0.6, 10), 0.25, 0.05),
                  std::invalid_argument);
  auto ok = ProbModel::standard(2, ProbFamily::step_schedule({{0, 0.8}, {10, 0.6}}),
                                ProbFamily::sinusoid(0.5, 0.2, 10), 0.25, 0.05);
  CHECK(ok.net(1, 2, 0) == doctest::Approx(0.8));
  CHECK(ok.net(1, 2, 11) == doctest::Approx(0.6));
}
