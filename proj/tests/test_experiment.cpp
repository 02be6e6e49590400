#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crwrap/experiment.hpp"
#include "crwrap/trace_io.hpp"

using namespace crwrap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("crwrap_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kBenignSpec = R"(# benign wrapped ct sweep
[experiment]
name = benign
model = cr-prob
algorithm = ct
wrapper = on
n = 3
seeds = 0..9
horizon = 5000
stop_on_all_decided = true
checks = validity,integrity,agreement
traces = full

[net]
family = constant
p = 0.9
eps = 0.05

[fp]
family = schedule
points = 0:0.999999,1:0.9
eps = 0.0000001
)";

}  // namespace

TEST_CASE("spec parsing round trip") {
  std::istringstream is(kBenignSpec);
  auto spec = parse_spec(is, "inline");
  CHECK(spec.name == "benign");
  CHECK(spec.model == ExperimentSpec::CrProb);
  CHECK(spec.n == 3);
  CHECK(spec.seed_begin == 0);
  CHECK(spec.seed_end == 9);
  CHECK(spec.checks.count("agreement"));
  CHECK(spec.traces == ExperimentSpec::TraceFull);
  CHECK(spec.net_family.at(0) == doctest::Approx(0.9));
  CHECK(spec.fp_family.at(0) == doctest::Approx(0.999999));
  CHECK(spec.fp_family.at(5) == doctest::Approx(0.9));
}

TEST_CASE("spec errors carry file and line") {
  std::istringstream is("[experiment]\nbogus_key = 1\n");
  CHECK_THROWS_WITH_AS(parse_spec(is, "bad.spec"), doctest::Contains("bad.spec:2"),
                       SpecError);

  std::istringstream is2("[experiment]\nmodel = warp\n");
  CHECK_THROWS_WITH_AS(parse_spec(is2, "bad.spec"), doctest::Contains("unknown model"),
                       SpecError);

  std::istringstream is3("[experiment]\nseeds = 0..3\nmodel = crash-stop\nwrapper = on\n");
  CHECK_THROWS_AS(parse_spec(is3, "bad.spec"), SpecError);
}

TEST_CASE("a one-seed zero-horizon experiment writes one clean row") {
  TempDir tmp;
  ExperimentSpec spec;
  spec.name = "tiny";
  spec.model = ExperimentSpec::CrProb;
  spec.algorithm = "null";
  spec.n = 2;
  spec.seed_begin = spec.seed_end = 0;
  spec.horizon = 0;
  spec.checks = {"validity", "integrity", "agreement"};
  spec.have_net = spec.have_fp = true;
  spec.net_family = ProbFamily::constant(0.9);
  spec.fp_family = ProbFamily::constant(0.9);
  spec.eps_net = spec.eps_f = 0.05;

  auto res = run_experiment(spec, tmp.path.string(), 1);
  CHECK(res.exit_code == 0);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].violations == 0);

  auto csv = slurp(res.summary_csv_path);
  CHECK(csv.find(summary_csv_header()) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("experiments reproduce byte-identical artifacts across worker counts") {
  TempDir tmp;
  std::istringstream is1(kBenignSpec), is2(kBenignSpec);
  auto spec = parse_spec(is1, "inline");
  spec.traces = ExperimentSpec::TraceNone;
  auto a = run_experiment(spec, (tmp.path / "a").string(), 4);
  auto b = run_experiment(spec, (tmp.path / "b").string(), 1);
  CHECK(slurp(a.summary_csv_path) == slurp(b.summary_csv_path));
  CHECK(slurp(a.verdict_json_path) == slurp(b.verdict_json_path));
  CHECK(a.exit_code == 0);
}

TEST_CASE("replay reproduces the live verdict and catches corruption") {
  TempDir tmp;
  std::istringstream is(kBenignSpec);
  auto spec = parse_spec(is, "inline");
  spec.seed_end = 49;
  auto res = run_experiment(spec, tmp.path.string(), 4);
  REQUIRE(res.exit_code == 0);

  SUBCASE("clean traces replay clean across 50 seeds") {
    for (long seed = 0; seed <= 49; ++seed) {
      const std::string trace =
          (tmp.path / "benign" / ("trace_s" + std::to_string(seed) + ".jsonl")).string();
      auto verdict = replay_trace(trace, {"validity", "integrity", "agreement"});
      CHECK(verdict.violations == 0);
    }
  }
  SUBCASE("a flipped decision is found at the corrupted index") {
    const std::string trace = (tmp.path / "benign" / "trace_s0.jsonl").string();
    StateTrace t;
    {
      std::ifstream f(trace);
      t = read_trace_jsonl(f);
    }
    REQUIRE(t.back()[0].dec.has_value());
    t.back()[0].dec = *t.back()[0].dec + 1;  // disagree with everyone
    {
      std::ofstream f(trace);
      write_trace_jsonl(f, t, false);
    }
    auto verdict = replay_trace(trace, {"agreement"});
    CHECK(verdict.violations == 1);
    CHECK(verdict.details[0].description.find("agreement") != std::string::npos);
  }
}

TEST_CASE("summary rows format pinned columns") {
  SummaryRow row;
  row.seed = 3;
  row.model = "cr-prob";
  row.n = 3;
  row.decided_fraction = 1.0;
  row.first_decision_step = 4;
  row.last_decision_step = 7;
  row.violations = 0;
  row.stable_periods = 2;
  row.b4_max_gap = 5;
  CHECK(summary_csv_line(row) == "1,3,cr-prob,3,1.000000,4,7,0,2,5,na");
  row.b5_ok = true;
  row.b4_max_gap.reset();
  row.first_decision_step.reset();
  CHECK(summary_csv_line(row) == "1,3,cr-prob,3,1.000000,,7,0,2,,true");
}

TEST_CASE("crash-stop experiments exercise bounds and b5 detection") {
  TempDir tmp;
  ExperimentSpec spec;
  spec.name = "cs";
  spec.model = ExperimentSpec::CrashStop;
  spec.wrapper = false;
  spec.algorithm = "ct";
  spec.n = 3;
  spec.seed_begin = 0;
  spec.seed_end = 19;
  spec.horizon = 624;
  spec.gst = 0;
  spec.crash_plan = {{0, 3}};
  spec.checks = {"validity", "integrity", "agreement", "bounds"};

  auto res = run_experiment(spec, tmp.path.string(), 2);
  CHECK(res.exit_code == 0);
  CHECK(res.b5_failures == 0);
  for (const auto& row : res.rows) {
    REQUIRE(row.b5_ok.has_value());
    CHECK(*row.b5_ok);
    CHECK(row.decided_fraction == 1.0);
    REQUIRE(row.b4_max_gap.has_value());
    CHECK(*row.b4_max_gap <= 12);
  }
  CHECK(res.bs_worst <= 1);
}
