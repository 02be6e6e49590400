#include "crwrap/prob.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crwrap {

double ProbFamily::at(long t) const {
  switch (kind) {
    case Constant:
      return p;
    case Schedule: {
      double cur = schedule.empty() ? p : schedule.front().second;
      for (const auto& [from, v] : schedule) {
        if (t >= from) cur = v;
        else break;
      }
      return cur;
    }
    case Sinusoid:
      return base + amplitude * std::sin(2.0 * M_PI * static_cast<double>(t % period) /
                                         static_cast<double>(period));
  }
  return p;
}

double ProbFamily::min_value() const {
  switch (kind) {
    case Constant: return p;
    case Schedule: {
      double m = schedule.empty() ? p : schedule.front().second;
      for (const auto& [from, v] : schedule) {
        (void)from;
        m = std::min(m, v);
      }
      return m;
    }
    case Sinusoid: return base - std::abs(amplitude);
  }
  return p;
}

double ProbFamily::max_value() const {
  switch (kind) {
    case Constant: return p;
    case Schedule: {
      double m = schedule.empty() ? p : schedule.front().second;
      for (const auto& [from, v] : schedule) {
        (void)from;
        m = std::max(m, v);
      }
      return m;
    }
    case Sinusoid: return base + std::abs(amplitude);
  }
  return p;
}

ProbFamily ProbFamily::constant(double p) {
  ProbFamily f;
  f.kind = Constant;
  f.p = p;
  return f;
}

ProbFamily ProbFamily::step_schedule(std::vector<std::pair<long, double>> sched) {
  if (sched.empty()) throw std::invalid_argument("empty schedule");
  std::sort(sched.begin(), sched.end());
  ProbFamily f;
  f.kind = Schedule;
  f.schedule = std::move(sched);
  f.p = f.schedule.front().second;
  return f;
}

ProbFamily ProbFamily::sinusoid(double base, double amplitude, long period) {
  if (period < 1) throw std::invalid_argument("period must be positive");
  ProbFamily f;
  f.kind = Sinusoid;
  f.base = base;
  f.amplitude = amplitude;
  f.period = period;
  return f;
}

double ProbModel::net(ProcessId, ProcessId, long t) const { return net_family.at(t); }

double ProbModel::fp(ProcessId p, long t) const {
  if (mode == Nastier && !correct.count(p)) {
    auto it = cutoffs.find(p);
    const long cutoff = it == cutoffs.end() ? 0 : it->second;
    if (t >= cutoff) return 0.0;
  }
  return fp_family.at(t);
}

void ProbModel::validate() const {
  if (n < 1) throw std::invalid_argument("prob model needs n >= 1");
  if (eps_net <= 0.0 || eps_f <= 0.0)
    throw std::invalid_argument("epsilon bounds must be positive");
  if (net_family.min_value() <= eps_net)
    throw std::invalid_argument("delivery probability does not clear eps_net");
  if (fp_family.min_value() <= eps_f || fp_family.max_value() >= 1.0 - eps_f)
    throw std::invalid_argument("availability does not fit inside (eps_f, 1-eps_f)");
  if (net_family.max_value() > 1.0 || net_family.min_value() < 0.0)
    throw std::invalid_argument("delivery probability out of [0,1]");
  if (mode == Nastier) {
    if (correct.empty()) throw std::invalid_argument("nastier mode needs a correct set");
    for (ProcessId p : correct)
      if (p < 1 || p > n) throw std::invalid_argument("correct set out of range");
    for (ProcessId p = 1; p <= n; ++p)
      if (!correct.count(p) && !cutoffs.count(p))
        throw std::invalid_argument("process outside the correct set needs a cutoff");
  }
}

ProbModel ProbModel::standard(int n, ProbFamily net, ProbFamily fp, double eps_net,
                              double eps_f) {
  ProbModel pm;
  pm.n = n;
  pm.net_family = std::move(net);
  pm.fp_family = std::move(fp);
  pm.eps_net = eps_net;
  pm.eps_f = eps_f;
  pm.validate();
  return pm;
}

ProbModel ProbModel::nastier(int n, ProbFamily net, ProbFamily fp, double eps_net,
                             double eps_f, std::set<ProcessId> correct,
                             std::map<ProcessId, long> cutoffs) {
  ProbModel pm;
  pm.n = n;
  pm.net_family = std::move(net);
  pm.fp_family = std::move(fp);
  pm.eps_net = eps_net;
  pm.eps_f = eps_f;
  pm.mode = Nastier;
  pm.correct = std::move(correct);
  pm.cutoffs = std::move(cutoffs);
  pm.validate();
  return pm;
}

ProbModel ProbModel::unchecked(int n, ProbFamily net, ProbFamily fp) {
  ProbModel pm;
  pm.n = n;
  pm.net_family = std::move(net);
  pm.fp_family = std::move(fp);
  pm.eps_net = 0.0;
  pm.eps_f = 0.0;
  return pm;
}

std::uint64_t Rng::mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform(std::uint64_t stream, std::uint64_t counter) const {
  std::uint64_t h = mix(seed ^ mix(stream));
  h = mix(h ^ mix(counter));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::channel_stream(ProcessId receiver, ProcessId sender, int n) {
  return 0x10000000ULL + static_cast<std::uint64_t>((receiver - 1) * n + (sender - 1));
}

std::uint64_t Rng::fail_stream(ProcessId p, int n) {
  return 0x20000000ULL + static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n) +
         static_cast<std::uint64_t>(p - 1);
}

std::uint64_t Rng::init_state_stream() { return 0x30000000ULL; }

std::uint64_t Rng::init_fail_stream(ProcessId p) {
  return 0x40000000ULL + static_cast<std::uint64_t>(p - 1);
}

}  // namespace crwrap
