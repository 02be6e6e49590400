#include "crwrap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "crwrap/algorithm.hpp"
#include "crwrap/checkers.hpp"
#include "crwrap/ct.hpp"
#include "crwrap/simulator.hpp"
#include "crwrap/stats.hpp"
#include "crwrap/superword.hpp"
#include "crwrap/trace_io.hpp"

namespace crwrap {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Spec parsing: a flat INI-style document with # comments.

namespace {

struct SpecCursor {
  std::string origin;
  long line = 0;
  [[noreturn]] void fail(const std::string& what) const {
    throw SpecError(origin + ":" + std::to_string(line) + ": " + what);
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long parse_long(const SpecCursor& at, const std::string& v) {
  try {
    std::size_t used = 0;
    long r = std::stol(v, &used);
    if (used != v.size()) at.fail("not an integer: '" + v + "'");
    return r;
  } catch (const SpecError&) {
    throw;
  } catch (...) {
    at.fail("not an integer: '" + v + "'");
  }
}

double parse_double(const SpecCursor& at, const std::string& v) {
  try {
    std::size_t used = 0;
    double r = std::stod(v, &used);
    if (used != v.size()) at.fail("not a number: '" + v + "'");
    return r;
  } catch (const SpecError&) {
    throw;
  } catch (...) {
    at.fail("not a number: '" + v + "'");
  }
}

bool parse_bool(const SpecCursor& at, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  at.fail("not a boolean: '" + v + "'");
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

struct FamilySection {
  std::map<std::string, std::string> kv;
  std::map<std::string, SpecCursor> at;
};

ProbFamily build_family(const FamilySection& sec, const SpecCursor& head) {
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = sec.kv.find(k);
    if (it == sec.kv.end()) return std::nullopt;
    return it->second;
  };
  const std::string fam = get("family").value_or("constant");
  if (fam == "constant") {
    auto p = get("p");
    if (!p) head.fail("constant family needs p");
    return ProbFamily::constant(parse_double(head, *p));
  }
  if (fam == "schedule") {
    auto pts = get("points");
    if (!pts) head.fail("schedule family needs points (step:p, comma separated)");
    std::vector<std::pair<long, double>> sched;
    for (const auto& item : split(*pts, ',')) {
      auto kv = split(item, ':');
      if (kv.size() != 2) head.fail("bad schedule point '" + item + "'");
      sched.emplace_back(parse_long(head, kv[0]), parse_double(head, kv[1]));
    }
    return ProbFamily::step_schedule(std::move(sched));
  }
  if (fam == "sinusoid") {
    auto base = get("base");
    auto amp = get("amplitude");
    auto per = get("period");
    if (!base || !amp || !per) head.fail("sinusoid family needs base, amplitude, period");
    return ProbFamily::sinusoid(parse_double(head, *base), parse_double(head, *amp),
                                parse_long(head, *per));
  }
  head.fail("unknown family '" + fam + "'");
}

}  // namespace

void ExperimentSpec::validate() const {
  if (n < 1) throw SpecError(name + ": n must be positive");
  if (n_f && (*n_f < 0 || *n_f >= n)) throw SpecError(name + ": need 0 <= n_f < n");
  if (wrapper && model == CrashStop)
    throw SpecError(name + ": the wrapper runs only under cr-nondet or cr-prob");
  if (!wrapper && model != CrashStop)
    throw SpecError(name + ": crash-recovery models execute the wrapped algorithm");
  if (model == CrProb && (!have_net || !have_fp))
    throw SpecError(name + ": cr-prob needs [net] and [fp] sections");
  if (seed_end < seed_begin) throw SpecError(name + ": empty seed range");
  if (horizon < 0) throw SpecError(name + ": negative horizon");
  if (nastier) {
    const int nf = n_f.value_or((n - 1) / 2);
    if (static_cast<int>(correct.size()) < n - nf)
      throw SpecError(name + ": nastier mode needs at least n - n_f correct processes");
  }
}

std::string ExperimentSpec::model_name() const {
  switch (model) {
    case CrashStop: return "crash-stop";
    case CrNondet: return "cr-nondet";
    case CrProb: return "cr-prob";
  }
  return "?";
}

ExperimentSpec parse_spec(std::istream& is, const std::string& origin) {
  ExperimentSpec spec;
  SpecCursor at{origin, 0};
  std::string section = "experiment";
  FamilySection net_sec, fp_sec;
  bool seeds_set = false;

  std::string line;
  while (std::getline(is, line)) {
    ++at.line;
    if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "net" && section != "fp" &&
          section != "nastier" && section != "crash-stop")
        at.fail("unknown section [" + section + "]");
      if (section == "net") spec.have_net = true;
      if (section == "fp") spec.have_fp = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) at.fail("empty key");

    if (section == "net" || section == "fp") {
      auto& sec = section == "net" ? net_sec : fp_sec;
      if (key == "eps") {
        (section == "net" ? spec.eps_net : spec.eps_f) = parse_double(at, val);
      } else {
        sec.kv[key] = val;
        sec.at[key] = at;
      }
      continue;
    }
    if (section == "nastier") {
      spec.nastier = true;
      if (key == "correct") {
        for (const auto& s : split(val, ','))
          spec.correct.insert(static_cast<ProcessId>(parse_long(at, s)));
      } else if (key.rfind("cutoff.", 0) == 0) {
        const ProcessId p = static_cast<ProcessId>(parse_long(at, key.substr(7)));
        spec.cutoffs[p] = parse_long(at, val);
      } else {
        at.fail("unknown nastier key '" + key + "'");
      }
      continue;
    }
    if (section == "crash-stop") {
      if (key == "gst") {
        spec.gst = parse_long(at, val);
      } else if (key == "crash_plan") {
        if (!val.empty()) {
          for (const auto& item : split(val, ',')) {
            auto kv = split(item, ':');
            if (kv.size() != 2) at.fail("crash_plan entries are step:process");
            spec.crash_plan.push_back(
                CrashPlanEntry{parse_long(at, kv[0]),
                               static_cast<ProcessId>(parse_long(at, kv[1]))});
          }
        }
      } else {
        at.fail("unknown crash-stop key '" + key + "'");
      }
      continue;
    }

    // [experiment]
    if (key == "name") spec.name = val;
    else if (key == "model") {
      if (val == "crash-stop") spec.model = ExperimentSpec::CrashStop;
      else if (val == "cr-nondet") spec.model = ExperimentSpec::CrNondet;
      else if (val == "cr-prob") spec.model = ExperimentSpec::CrProb;
      else at.fail("unknown model '" + val + "'");
      if (spec.model == ExperimentSpec::CrashStop) spec.wrapper = false;
    } else if (key == "algorithm") spec.algorithm = val;
    else if (key == "wrapper") spec.wrapper = parse_bool(at, val);
    else if (key == "n") spec.n = static_cast<int>(parse_long(at, val));
    else if (key == "n_f") spec.n_f = static_cast<int>(parse_long(at, val));
    else if (key == "inputs") {
      for (const auto& s : split(val, ',')) spec.inputs.push_back(parse_long(at, s));
    } else if (key == "seeds") {
      const auto dots = val.find("..");
      if (dots == std::string::npos) {
        spec.seed_begin = spec.seed_end = parse_long(at, val);
      } else {
        spec.seed_begin = parse_long(at, trim(val.substr(0, dots)));
        spec.seed_end = parse_long(at, trim(val.substr(dots + 2)));
      }
      seeds_set = true;
    } else if (key == "horizon") spec.horizon = parse_long(at, val);
    else if (key == "stop_on_all_decided") spec.stop_on_all_decided = parse_bool(at, val);
    else if (key == "delta") spec.delta = parse_long(at, val);
    else if (key == "checks") {
      for (const auto& s : split(val, ',')) spec.checks.insert(s);
    } else if (key == "traces") {
      if (val == "none") spec.traces = ExperimentSpec::TraceNone;
      else if (val == "digest") spec.traces = ExperimentSpec::TraceDigest;
      else if (val == "full") spec.traces = ExperimentSpec::TraceFull;
      else at.fail("traces must be none|digest|full");
    } else at.fail("unknown key '" + key + "'");
  }

  if (!seeds_set) throw SpecError(origin + ": missing seeds");
  SpecCursor head{origin, 0};
  if (spec.have_net) spec.net_family = build_family(net_sec, head);
  if (spec.have_fp) spec.fp_family = build_family(fp_sec, head);
  if (spec.have_net && spec.eps_net == 0.0)
    spec.eps_net = std::max(1e-9, spec.net_family.min_value() * 0.5);
  if (spec.have_fp && spec.eps_f == 0.0)
    spec.eps_f = std::max(1e-9, std::min(spec.fp_family.min_value(),
                                         1.0 - spec.fp_family.max_value()) *
                                    0.5);
  spec.validate();
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SpecError("cannot open spec file: " + path);
  return parse_spec(f, path);
}

// ---------------------------------------------------------------------------
// CSV

std::string summary_csv_header() {
  return "schema_version,seed,model,N,decided_fraction,first_decision_step,"
         "last_decision_step,violations,stable_periods,b4_max_gap,b5_ok";
}

namespace {
std::string fmt_fraction(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", f);
  return buf;
}
}  // namespace

std::string summary_csv_line(const SummaryRow& row) {
  std::ostringstream os;
  os << 1 << ',' << row.seed << ',' << row.model << ',' << row.n << ','
     << fmt_fraction(row.decided_fraction) << ',';
  if (row.first_decision_step) os << *row.first_decision_step;
  os << ',';
  if (row.last_decision_step) os << *row.last_decision_step;
  os << ',' << row.violations << ',' << row.stable_periods << ',';
  if (row.b4_max_gap) os << *row.b4_max_gap;
  os << ',';
  if (row.b5_ok) os << (*row.b5_ok ? "true" : "false");
  else os << "na";
  return os.str();
}

// ---------------------------------------------------------------------------
// Per-seed execution

namespace {

ProbModel build_prob_model(const ExperimentSpec& spec) {
  if (spec.model == ExperimentSpec::CrNondet)
    return ProbModel::unchecked(spec.n, spec.net_family, spec.fp_family);
  if (spec.nastier)
    return ProbModel::nastier(spec.n, spec.net_family, spec.fp_family, spec.eps_net,
                              spec.eps_f, spec.correct, spec.cutoffs);
  return ProbModel::standard(spec.n, spec.net_family, spec.fp_family, spec.eps_net,
                             spec.eps_f);
}

// Rolling stable-period counter over the last delta+1 steps, with the
// selection fixed to the processes that are up in the window's start config.
class StablePeriodCounter {
 public:
  StablePeriodCounter(int n, long delta) : n_(n), delta_(delta) {}

  void start(const std::set<ProcessId>& failed0) { failed_.push_back(failed0); }

  void step(const CRLabel& label, const std::set<ProcessId>& failed_after) {
    std::vector<bool> delivered(static_cast<std::size_t>(n_) * n_, false);
    for (ProcessId p = 1; p <= n_; ++p)
      for (ProcessId q = 1; q <= n_; ++q)
        delivered[(p - 1) * n_ + (q - 1)] = label.rmsgs[p - 1].count(q) > 0;
    delivered_.push_back(std::move(delivered));
    failed_.push_back(failed_after);
    const std::size_t keep = static_cast<std::size_t>(delta_) + 2;
    while (failed_.size() > keep) failed_.pop_front();
    while (delivered_.size() > keep - 1) delivered_.pop_front();
    evaluate();
  }

  long count() const { return count_; }

 private:
  void evaluate() {
    // Deques hold configs i..i+delta+1 and the steps between them.
    if (static_cast<long>(failed_.size()) < delta_ + 2) return;
    const auto& start_failed = failed_.front();
    std::set<ProcessId> c_set;
    for (ProcessId p = 1; p <= n_; ++p)
      if (!start_failed.count(p)) c_set.insert(p);
    std::set<ProcessId> expect_failed = start_failed;
    for (std::size_t k = 1; k < failed_.size(); ++k)
      if (!(failed_[k] == expect_failed)) return;
    // Steps strictly inside the window: all but the entry transition.
    for (std::size_t k = 1; k + 1 < delivered_.size() + 1 && k <= static_cast<std::size_t>(delta_); ++k) {
      const auto& d = delivered_[k];
      for (ProcessId p : c_set)
        for (ProcessId q : c_set)
          if (!d[(p - 1) * n_ + (q - 1)]) return;
    }
    ++count_;
  }

  int n_;
  long delta_;
  std::deque<std::set<ProcessId>> failed_;
  std::deque<std::vector<bool>> delivered_;
  long count_ = 0;
};

struct SeedOutputs {
  SummaryRow row;
  std::vector<ViolationRecord> violations;
  bool certificate_failed = false;
  int bs_max = 0;
  RunOutcome outcome;
};

void note_violation(SeedOutputs& out, long seed, const std::optional<Violation>& v,
                    const SuperwordCertificate* cert) {
  if (!v) return;
  ViolationRecord rec;
  rec.seed = seed;
  rec.description = v->describe();
  if (cert && cert->ok()) {
    const auto loc = localize_violation(*v, *cert);
    rec.localization = loc.note + ": core trace letter " +
                       std::to_string(loc.core_violation.i);
  }
  out.violations.push_back(std::move(rec));
  ++out.row.violations;
}

SeedOutputs run_cr_seed(const ExperimentSpec& spec, long seed, const ProbModel& pm,
                        const WrappedAlgorithm& walg, const std::string& trace_dir) {
  SeedOutputs out;
  out.row.seed = seed;
  out.row.model = spec.model_name();
  out.row.n = spec.n;

  const int n = spec.n;
  const std::set<ProcessId> scope = spec.nastier ? spec.correct : std::set<ProcessId>{};

  const bool want_cert = spec.checks.count("certificates") > 0;
  const bool want_bounds = spec.checks.count("bounds") > 0;
  const bool keep_run = want_cert || want_bounds || spec.traces != ExperimentSpec::TraceNone;
  if (keep_run && spec.horizon > 200000)
    throw SpecError(spec.name + ": horizon too large to retain full runs");

  CrExecutor ex(walg, pm, static_cast<std::uint64_t>(seed));
  ValidityChecker validity;
  IntegrityChecker integrity;
  AgreementChecker agreement;
  StablePeriodCounter stable(n, spec.delta);

  CRRun run;
  out.outcome.decision_steps.assign(n, std::nullopt);

  auto observe = [&](const CRConfig& c) {
    const GlobalState letter = cr_trace_letter(c);
    if (spec.checks.count("validity")) validity.feed(letter);
    if (spec.checks.count("integrity")) integrity.feed(letter);
    if (spec.checks.count("agreement")) agreement.feed(letter);
    for (ProcessId p = 1; p <= n; ++p)
      if (!out.outcome.decision_steps[p - 1] && letter[p - 1].dec)
        out.outcome.decision_steps[p - 1] = c.n;
  };

  observe(ex.config());
  stable.start(ex.config().failed);
  if (keep_run) run.configs.push_back(ex.config());

  for (long i = 0; i < spec.horizon; ++i) {
    if (spec.stop_on_all_decided && ex.all_decided(scope)) break;
    ex.step();
    observe(ex.config());
    stable.step(ex.last_label(), ex.config().failed);
    if (keep_run) {
      run.labels.push_back(ex.last_label());
      run.configs.push_back(ex.config());
    }
  }

  long decided = 0;
  std::vector<ProcessId> in_scope;
  for (ProcessId p = 1; p <= n; ++p)
    if (scope.empty() || scope.count(p)) in_scope.push_back(p);
  std::optional<long> first, last;
  for (ProcessId p : in_scope) {
    const auto& d = out.outcome.decision_steps[p - 1];
    if (d) {
      ++decided;
      first = first ? std::min(*first, *d) : *d;
      last = last ? std::max(*last, *d) : *d;
    }
  }
  out.row.decided_fraction =
      in_scope.empty() ? 1.0
                       : static_cast<double>(decided) / static_cast<double>(in_scope.size());
  out.row.first_decision_step = first;
  out.row.last_decision_step = last;
  out.row.stable_periods = stable.count();

  SuperwordCertificate cert;
  if (want_cert) {
    cert = reconstruct_superword(run, walg);
    if (!cert.ok()) {
      out.certificate_failed = true;
      ViolationRecord rec;
      rec.seed = seed;
      rec.description = "superword certificate failed: " + cert.failure;
      out.violations.push_back(std::move(rec));
    }
  }

  note_violation(out, seed, validity.result(), want_cert ? &cert : nullptr);
  note_violation(out, seed, integrity.result(), want_cert ? &cert : nullptr);
  note_violation(out, seed, agreement.result(), want_cert ? &cert : nullptr);

  if (want_bounds) {
    const auto rep = check_bounds_cr(run, walg.core(), ct_bounds(n));
    if (rep.applicable) {
      out.row.b4_max_gap = rep.b4_max_gap;
      out.bs_max = rep.max_msgs_per_bucket;
    }
  }

  if (spec.traces != ExperimentSpec::TraceNone) {
    const bool verbose = spec.traces == ExperimentSpec::TraceFull;
    std::ofstream tf(trace_dir + "/trace_s" + std::to_string(seed) + ".jsonl");
    write_trace_jsonl(tf, trace_of_cr_run(run), verbose);
    std::ofstream lf(trace_dir + "/labels_s" + std::to_string(seed) + ".jsonl");
    for (std::size_t i = 0; i < run.labels.size(); ++i)
      write_cr_label_digest(lf, static_cast<long>(i + 1), run.labels[i]);
  }
  return out;
}

SeedOutputs run_cs_seed(const ExperimentSpec& spec, long seed,
                        const CrashStopAlgorithm& alg, const std::string& trace_dir) {
  SeedOutputs out;
  out.row.seed = seed;
  out.row.model = spec.model_name();
  out.row.n = spec.n;
  out.outcome.decision_steps.assign(spec.n, std::nullopt);

  CrashStopRun run = cs_fair_scheduler(alg, static_cast<std::uint64_t>(seed),
                                       spec.horizon, spec.crash_plan, spec.gst);
  const StateTrace trace = trace_of_cs_run(run);

  if (spec.checks.count("validity")) note_violation(out, seed, check_validity(trace), nullptr);
  if (spec.checks.count("integrity"))
    note_violation(out, seed, check_integrity(trace), nullptr);
  if (spec.checks.count("agreement"))
    note_violation(out, seed, check_agreement(trace), nullptr);

  for (std::size_t i = 0; i < trace.size(); ++i)
    for (ProcessId p = 1; p <= spec.n; ++p)
      if (!out.outcome.decision_steps[p - 1] && trace[i][p - 1].dec)
        out.outcome.decision_steps[p - 1] = static_cast<long>(i);

  std::set<ProcessId> crashed_at_0;
  for (const auto& e : spec.crash_plan)
    if (e.step == 0) crashed_at_0.insert(e.p);
  const bool b5_preconditions =
      spec.gst == 0 && !crashed_at_0.empty() &&
      crashed_at_0.size() == spec.crash_plan.size() &&
      static_cast<int>(crashed_at_0.size()) <= alg.n_f();

  std::optional<long> first, last;
  long decided = 0;
  std::vector<ProcessId> scope;
  for (ProcessId p = 1; p <= spec.n; ++p)
    if (!crashed_at_0.count(p)) scope.push_back(p);
  for (ProcessId p : scope) {
    const auto& d = out.outcome.decision_steps[p - 1];
    if (d) {
      ++decided;
      first = first ? std::min(*first, *d) : *d;
      last = last ? std::max(*last, *d) : *d;
    }
  }
  out.row.decided_fraction =
      scope.empty() ? 1.0 : static_cast<double>(decided) / static_cast<double>(scope.size());
  out.row.first_decision_step = first;
  out.row.last_decision_step = last;

  if (spec.checks.count("bounds")) {
    std::optional<B5Scenario> scen;
    if (b5_preconditions) {
      B5Scenario s;
      for (ProcessId p : scope) s.correct.insert(p);
      scen = s;
    }
    const auto rep = check_bounds_cs(run, alg, ct_bounds(spec.n), scen);
    if (rep.applicable) {
      out.row.b4_max_gap = rep.b4_max_gap;
      out.bs_max = rep.max_msgs_per_bucket;
      out.row.b5_ok = rep.b5_ok;
    }
  }

  if (spec.traces != ExperimentSpec::TraceNone) {
    const bool verbose = spec.traces == ExperimentSpec::TraceFull;
    std::ofstream tf(trace_dir + "/trace_s" + std::to_string(seed) + ".jsonl");
    write_trace_jsonl(tf, trace, verbose);
    std::ofstream lf(trace_dir + "/labels_s" + std::to_string(seed) + ".jsonl");
    for (std::size_t i = 0; i < run.labels.size(); ++i)
      write_cs_label(lf, static_cast<long>(i + 1), run.labels[i]);
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                int jobs) {
  spec.validate();
  ExperimentResult result;

  const fs::path dir = fs::path(out_dir) / spec.name;
  fs::create_directories(dir);

  AlgorithmPtr alg = make_algorithm(spec.algorithm, spec.n, spec.inputs, spec.n_f);
  std::optional<WrappedAlgorithm> walg;
  std::optional<ProbModel> pm;
  if (spec.model != ExperimentSpec::CrashStop) {
    walg.emplace(alg);
    pm = build_prob_model(spec);
  }

  const long seeds = spec.seed_end - spec.seed_begin + 1;
  std::vector<SeedOutputs> outputs(static_cast<std::size_t>(seeds));
  std::vector<std::string> errors(static_cast<std::size_t>(seeds));

  const int workers = std::max(1, jobs);
  std::vector<std::thread> pool;
  std::atomic<long> next_index{0};
  auto work = [&]() {
    for (;;) {
      const long k = next_index.fetch_add(1);
      if (k >= seeds) return;
      const long seed = spec.seed_begin + k;
      try {
        outputs[static_cast<std::size_t>(k)] =
            spec.model == ExperimentSpec::CrashStop
                ? run_cs_seed(spec, seed, *alg, dir.string())
                : run_cr_seed(spec, seed, *pm, *walg, dir.string());
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(k)] = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw SpecError(spec.name + ": " + e);

  // Aggregation in ascending seed order keeps every artifact reproducible.
  long fully_decided = 0;
  for (auto& o : outputs) {
    result.rows.push_back(o.row);
    for (auto& v : o.violations) result.violations.push_back(std::move(v));
    if (o.certificate_failed) ++result.certificate_failures;
    if (o.row.decided_fraction >= 1.0) ++fully_decided;
    if (o.row.b4_max_gap) result.b4_worst_gap = std::max(result.b4_worst_gap, *o.row.b4_max_gap);
    result.bs_worst = std::max(result.bs_worst, o.bs_max);
    if (o.row.b5_ok && !*o.row.b5_ok) ++result.b5_failures;
  }
  result.decided_runs_fraction =
      seeds > 0 ? static_cast<double>(fully_decided) / static_cast<double>(seeds) : 0.0;

  const fs::path csv_path = dir / "summary.csv";
  {
    std::ofstream csv(csv_path);
    csv << summary_csv_header() << "\n";
    for (const auto& row : result.rows) csv << summary_csv_line(row) << "\n";
  }
  result.summary_csv_path = csv_path.string();

  long violation_count = 0;
  for (const auto& r : result.rows) violation_count += r.violations;

  const fs::path verdict_path = dir / "verdict.json";
  {
    json v;
    v["schema_version"] = 1;
    v["name"] = spec.name;
    v["model"] = spec.model_name();
    v["runs"] = seeds;
    v["violations"] = violation_count;
    v["certificate_failures"] = result.certificate_failures;
    v["decided_fraction"] = result.decided_runs_fraction;
    v["bound_reports"] = json{{"b4_worst_gap", result.b4_worst_gap},
                              {"b_s_worst", result.bs_worst},
                              {"b5_failures", result.b5_failures}};
    json details = json::array();
    for (const auto& rec : result.violations) {
      details.push_back(json{{"seed", rec.seed},
                             {"description", rec.description},
                             {"localization", rec.localization}});
    }
    v["violation_details"] = std::move(details);
    std::ofstream vf(verdict_path);
    vf << v.dump(2) << "\n";
  }
  result.verdict_json_path = verdict_path.string();

  // Timestamps live outside the reproducible artifacts.
  {
    std::ofstream meta(dir / "meta.json");
    meta << json{{"generated_unix", static_cast<long>(::time(nullptr))}}.dump() << "\n";
  }

  result.exit_code = (violation_count > 0 || result.certificate_failures > 0) ? 1 : 0;
  return result;
}

ReplayVerdict replay_trace(const std::string& trace_path,
                           const std::set<std::string>& checks) {
  std::ifstream f(trace_path);
  if (!f) throw TraceReadError("cannot open trace file: " + trace_path);
  const StateTrace trace = read_trace_jsonl(f);

  ReplayVerdict verdict;
  auto note = [&](const std::optional<Violation>& v) {
    if (!v) return;
    ++verdict.violations;
    verdict.details.push_back(ViolationRecord{0, v->describe(), ""});
  };
  if (checks.empty() || checks.count("validity")) note(check_validity(trace));
  if (checks.empty() || checks.count("integrity")) note(check_integrity(trace));
  if (checks.empty() || checks.count("agreement")) note(check_agreement(trace));
  return verdict;
}

}  // namespace crwrap
