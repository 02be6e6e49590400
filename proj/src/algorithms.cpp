#include "crwrap/algorithm.hpp"

#include <stdexcept>

#include "crwrap/ct.hpp"

namespace crwrap {

std::vector<Value> default_inputs(int n) {
  std::vector<Value> v(n);
  for (int p = 1; p <= n; ++p) v[p - 1] = 10 * p;
  return v;
}

namespace {

std::vector<Value> fill_inputs(int n, std::vector<Value> inputs) {
  if (inputs.empty()) return default_inputs(n);
  if (static_cast<int>(inputs.size()) != n)
    throw std::invalid_argument("inputs size does not match process count");
  return inputs;
}

GlobalState plain_initial(int n, const std::vector<Value>& inputs) {
  GlobalState g(n);
  for (int p = 1; p <= n; ++p) g[p - 1].inp = inputs[p - 1];
  return g;
}

class NullAlgorithm : public CrashStopAlgorithm {
 public:
  NullAlgorithm(int n, std::vector<Value> inputs, int n_f)
      : n_(n), n_f_(n_f), inputs_(fill_inputs(n, std::move(inputs))) {}

  int n() const override { return n_; }
  int n_f() const override { return n_f_; }
  std::string name() const override { return "null"; }
  std::vector<GlobalState> initial_states() const override {
    return {plain_initial(n_, inputs_)};
  }
  LocalCoreState next(const LocalCoreState& s, const Rmsg&, const FdOutput&) const override {
    return s;
  }

 private:
  int n_;
  int n_f_;
  std::vector<Value> inputs_;
};

class InstantDecideAlgorithm : public CrashStopAlgorithm {
 public:
  InstantDecideAlgorithm(int n, std::vector<Value> inputs)
      : n_(n), inputs_(fill_inputs(n, std::move(inputs))) {}

  int n() const override { return n_; }
  int n_f() const override { return 0; }
  std::string name() const override { return "instant"; }
  std::vector<GlobalState> initial_states() const override {
    return {plain_initial(n_, inputs_)};
  }
  LocalCoreState next(const LocalCoreState& s, const Rmsg& rmsg, const FdOutput&) const override {
    LocalCoreState r = s;
    if (!r.dec) {
      if (rmsg && is_decide(rmsg->m)) {
        r.dec = rmsg->m.value;
      } else {
        r.dec = r.inp;
      }
    }
    return r;
  }

 private:
  int n_;
  std::vector<Value> inputs_;
};

// Payload.a: 0 = fresh, 1 = ping sent / ping handled.
class PingAlgorithm : public CrashStopAlgorithm {
 public:
  explicit PingAlgorithm(std::vector<Value> inputs)
      : inputs_(fill_inputs(2, std::move(inputs))) {}

  int n() const override { return 2; }
  int n_f() const override { return 0; }
  std::string name() const override { return "ping"; }
  std::vector<GlobalState> initial_states() const override {
    GlobalState g = plain_initial(2, inputs_);
    for (int p = 1; p <= 2; ++p) g[p - 1].payload = ToyPayload{0, p};
    return {g};
  }
  LocalCoreState next(const LocalCoreState& s, const Rmsg& rmsg, const FdOutput&) const override {
    LocalCoreState r = s;
    if (r.dec) return r;
    if (rmsg && is_decide(rmsg->m)) {
      r.dec = rmsg->m.value;
      return r;
    }
    auto& toy = std::get<ToyPayload>(r.payload);
    if (rmsg && rmsg->m.kind == msg::kPing) {
      r.dec = rmsg->m.value;
      toy.a = 1;
      r.outbox.emplace_back(rmsg->sender, decide_message(*r.dec));
      return r;
    }
    if (toy.a == 0) {
      toy.a = 1;
      // Only process 1 opens the exchange; the payload value rides along.
      if (toy.b == 1) r.outbox.emplace_back(2, Message{msg::kPing, 1, r.inp, 0});
    }
    return r;
  }

 private:
  std::vector<Value> inputs_;
};

}  // namespace

AlgorithmPtr make_null_algorithm(int n, std::vector<Value> inputs, int n_f) {
  return std::make_shared<NullAlgorithm>(n, std::move(inputs), n_f);
}

AlgorithmPtr make_instant_decide_algorithm(int n, std::vector<Value> inputs) {
  return std::make_shared<InstantDecideAlgorithm>(n, std::move(inputs));
}

AlgorithmPtr make_ping_algorithm(std::vector<Value> inputs) {
  return std::make_shared<PingAlgorithm>(std::move(inputs));
}

AlgorithmPtr make_algorithm(const std::string& name, int n, std::vector<Value> inputs,
                            std::optional<int> n_f) {
  if (name == "ct") return make_ct_algorithm(n, std::move(inputs), n_f);
  if (name == "null") return make_null_algorithm(n, std::move(inputs), n_f.value_or(0));
  if (name == "instant") return make_instant_decide_algorithm(n, std::move(inputs));
  if (name == "ping") {
    if (n != 2) throw std::invalid_argument("ping algorithm requires n = 2");
    return make_ping_algorithm(std::move(inputs));
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

}  // namespace crwrap
