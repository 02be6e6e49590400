#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "crwrap/algorithm.hpp"
#include "crwrap/crash_stop.hpp"
#include "crwrap/ct.hpp"
#include "crwrap/trace_io.hpp"

using namespace crwrap;

namespace {

CrashStopConfig initial_of(const CrashStopAlgorithm& alg) {
  CrashStopConfig c;
  c.s = alg.initial_states()[0];
  return c;
}

std::string run_bytes(const CrashStopRun& run) {
  std::ostringstream os;
  write_trace_jsonl(os, trace_of_cs_run(run), true);
  for (std::size_t i = 0; i < run.labels.size(); ++i)
    write_cs_label(os, static_cast<long>(i), run.labels[i]);
  return os.str();
}

}  // namespace

TEST_CASE("identity step leaves the configuration unchanged") {
  auto alg = make_null_algorithm(2);
  auto c = initial_of(*alg);
  CrashStopLabel l{1, std::nullopt, {}, {}};
  auto r = cs_apply_step(c, l, *alg);
  REQUIRE(std::holds_alternative<CrashStopConfig>(r));
  CHECK(std::get<CrashStopConfig>(r) == c);
}

TEST_CASE("step violations carry their kind") {
  auto alg = make_null_algorithm(2);
  auto c = initial_of(*alg);

  SUBCASE("delivering a message that is not in flight") {
    CrashStopLabel l{1, ReceivedMessage{2, Message{msg::kPing, 1, 0, 0}}, {}, {}};
    auto r = cs_apply_step(c, l, *alg);
    REQUIRE(std::holds_alternative<CsViolation>(r));
    CHECK(std::get<CsViolation>(r).kind == CsViolationKind::MessageNotInFlight);
  }
  SUBCASE("stepping a failed process") {
    c.failed = {1};
    CrashStopLabel l{1, std::nullopt, {1}, {}};
    auto r = cs_apply_step(c, l, *alg);
    REQUIRE(std::holds_alternative<CsViolation>(r));
    CHECK(std::get<CsViolation>(r).kind == CsViolationKind::FailedProcessStepped);
  }
  SUBCASE("shrinking the failure set") {
    c.failed = {2};
    CrashStopLabel l{1, std::nullopt, {}, {}};
    auto r = cs_apply_step(c, l, *alg);
    REQUIRE(std::holds_alternative<CsViolation>(r));
    CHECK(std::get<CsViolation>(r).kind == CsViolationKind::FailureSetShrank);
  }
  SUBCASE("re-sending an in-flight message") {
    auto ping = make_ping_algorithm();
    auto c2 = initial_of(*ping);
    CrashStopLabel boot{1, std::nullopt, {}, {}};
    auto r1 = cs_apply_step(c2, boot, *ping);
    auto after = std::get<CrashStopConfig>(r1);
    REQUIRE(after.in_flight.size() == 1);
    // Forge a configuration whose state would re-send the same ping.
    after.s[0] = c2.s[0];
    auto r2 = cs_apply_step(after, boot, *ping);
    REQUIRE(std::holds_alternative<CsViolation>(r2));
    CHECK(std::get<CsViolation>(r2).kind == CsViolationKind::DuplicateMessage);
  }
}

TEST_CASE("ct coordinator step consumes the delivered estimate") {
  auto alg = make_ct_algorithm(3, {10, 20, 30});
  auto c = initial_of(*alg);
  // Boot everyone through one empty-handed step each.
  for (ProcessId p : {1, 2, 3}) {
    CrashStopLabel l{p, std::nullopt, {}, {}};
    c = std::get<CrashStopConfig>(cs_apply_step(c, l, *alg));
  }
  // Estimates from 2 and 3 are now in flight toward coordinator 1.
  REQUIRE(c.in_flight.size() == 2);
  const MsgTriple est = c.in_flight.front();
  CHECK(est.receiver == 1);
  CHECK(est.m.kind == msg::kEstimate);

  CrashStopLabel deliver{1, ReceivedMessage{est.sender, est.m}, {}, {}};
  auto r = cs_apply_step(c, deliver, *alg);
  auto c2 = std::get<CrashStopConfig>(r);
  // The delivered estimate left the in-flight set; quorum was reached, so the
  // proposals to the two peers joined it.
  CHECK(c2.in_flight.size() == 1 + 2);
  for (const auto& t : c2.in_flight) CHECK_FALSE(t == est);
  const auto& ct = std::get<CtPayload>(c2.s[0].payload);
  CHECK(ct.phase == 4);
  CHECK(ct.ts == 1);
}

TEST_CASE("run validation accepts scheduler output and flags corruption") {
  auto alg = make_ct_algorithm(3);

  SUBCASE("single configuration run is valid") {
    CrashStopRun run;
    run.configs.push_back(initial_of(*alg));
    CHECK(cs_run_valid(run, *alg, 0).ok);
  }
  SUBCASE("a forged step is reported at its index") {
    auto run = cs_fair_scheduler(*alg, 0, 4, {});
    run.configs[1].failed = {1};
    run.labels[1].p = 1;
    run.labels[1].fails = {1};
    auto v = cs_run_valid(run, *alg, kUnreliableFd);
    CHECK_FALSE(v.ok);
  }
  SUBCASE("every scheduler run validates (100 seeds)") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto run = cs_fair_scheduler(*alg, seed, 60, {});
      auto v = cs_run_valid(run, *alg, 0);
      INFO("seed ", seed, " violation ",
           v.ok ? "none" : to_string(v.violation->kind));
      CHECK(v.ok);
    }
  }
  SUBCASE("crashes from the plan keep runs valid") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto run = cs_fair_scheduler(*alg, seed, 60, {{5, 2}});
      CHECK(cs_run_valid(run, *alg, 0).ok);
    }
  }
}

TEST_CASE("scheduler basics") {
  auto alg = make_ct_algorithm(3);
  SUBCASE("horizon zero yields only the initial configuration") {
    auto run = cs_fair_scheduler(*alg, 9, 0, {});
    CHECK(run.configs.size() == 1);
    CHECK(run.labels.empty());
  }
  SUBCASE("same seed and plan reproduce the run byte for byte") {
    auto a = cs_fair_scheduler(*alg, 5, 40, {{3, 1}});
    auto b = cs_fair_scheduler(*alg, 5, 40, {{3, 1}});
    CHECK(run_bytes(a) == run_bytes(b));
  }
  SUBCASE("failure sets never shrink along a run") {
    auto run = cs_fair_scheduler(*alg, 2, 50, {{4, 3}, {10, 1}});
    for (std::size_t i = 1; i < run.configs.size(); ++i) {
      const auto& prev = run.configs[i - 1].failed;
      const auto& cur = run.configs[i].failed;
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    }
  }
  SUBCASE("message bookkeeping is conserved step by step") {
    auto run = cs_fair_scheduler(*alg, 3, 60, {});
    for (std::size_t i = 0; i < run.labels.size(); ++i) {
      const auto& before = run.configs[i].in_flight;
      const auto& after = run.configs[i + 1].in_flight;
      std::size_t carried = 0;
      for (const auto& t : after)
        if (std::find(before.begin(), before.end(), t) != before.end()) ++carried;
      std::size_t expect_carry = before.size();
      if (run.labels[i].rmsg) --expect_carry;
      CHECK(carried == expect_carry);
    }
  }
  SUBCASE("detector output is truthful from gst on") {
    auto run = cs_fair_scheduler(*alg, 4, 50, {{7, 2}}, 10);
    for (std::size_t i = 0; i < run.labels.size(); ++i)
      if (i >= 10) CHECK(run.labels[i].fdo == run.configs[i].failed);
  }
  SUBCASE("no message waits longer than n * flight-size steps") {
    auto run = cs_fair_scheduler(*alg, 6, 80, {});
    const int n = 3;
    for (std::size_t i = 0; i < run.labels.size(); ++i) {
      const auto& before = run.configs[i].in_flight;
      for (const auto& t : run.configs[i + 1].in_flight) {
        if (std::find(before.begin(), before.end(), t) != before.end()) continue;
        const long bound = n * static_cast<long>(run.configs[i + 1].in_flight.size());
        bool delivered = false;
        for (std::size_t j = i + 1; j < run.labels.size(); ++j) {
          if (run.labels[j].rmsg && run.labels[j].p == t.receiver &&
              run.labels[j].rmsg->sender == t.sender && run.labels[j].rmsg->m == t.m) {
            delivered = true;
            CHECK(static_cast<long>(j - i) <= bound);
            break;
          }
        }
        if (!delivered) {
          const auto& last = run.configs.back().in_flight;
          CHECK(std::find(last.begin(), last.end(), t) != last.end());
        }
      }
    }
  }
}

TEST_CASE("extend_reliable preserves the prefix and validity") {
  auto alg = make_ct_algorithm(3);
  auto run = cs_fair_scheduler(*alg, 11, 20, {});

  SUBCASE("zero extra steps is the identity") {
    auto same = extend_reliable(run, *alg, 0, 11, 0);
    CHECK(run_bytes(same) == run_bytes(run));
  }
  SUBCASE("extension keeps validity and the old trace prefix") {
    auto longer = extend_reliable(run, *alg, 50, 11, 0);
    CHECK(longer.configs.size() == run.configs.size() + 50);
    CHECK(cs_run_valid(longer, *alg, kUnreliableFd).ok);
    for (std::size_t i = 0; i < run.configs.size(); ++i)
      CHECK(longer.configs[i] == run.configs[i]);
  }
  SUBCASE("invalid runs are refused") {
    auto broken = run;
    broken.configs.back().failed = {1, 2, 3};
    CHECK_THROWS_AS(extend_reliable(broken, *alg, 5), std::invalid_argument);
  }
}

TEST_CASE("detector emulator is arbitrary before gst and exact after") {
  FdEmulator fd{5, 123};
  std::set<ProcessId> failed{2};
  CHECK(fd.output(5, failed, 3) == failed);
  CHECK(fd.output(100, failed, 3) == failed);
  CHECK(fd.output(2, failed, 3) == FdEmulator{5, 123}.output(2, failed, 3));
}
