#include "crwrap/trace_io.hpp"

#include <ostream>
#include <istream>
#include <sstream>

#include "json.hpp"

namespace crwrap {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

namespace {

json message_to_json(const Message& m) {
  return json{{"kind", m.kind}, {"round", m.round}, {"value", m.value}, {"ts", m.ts}};
}

json payload_to_json(const Payload& p) {
  if (const auto* ct = std::get_if<CtPayload>(&p)) {
    json pe = json::array();
    for (const auto& [r, m] : ct->pending_est) {
      for (const auto& [q, et] : m)
        pe.push_back(json{{"r", r}, {"q", q}, {"v", et.first}, {"ts", et.second}});
    }
    json pr = json::array();
    for (const auto& [r, m] : ct->pending_replies) {
      for (const auto& [q, ok] : m) pr.push_back(json{{"r", r}, {"q", q}, {"ok", ok}});
    }
    json col = json::array();
    for (const auto& [q, et] : ct->collected)
      col.push_back(json{{"q", q}, {"v", et.first}, {"ts", et.second}});
    json rep = json::array();
    for (const auto& [q, ok] : ct->replies) rep.push_back(json{{"q", q}, {"ok", ok}});
    return json{{"type", "ct"},      {"self", ct->self},   {"started", ct->started},
                {"round", ct->round}, {"phase", ct->phase}, {"estimate", ct->estimate},
                {"ts", ct->ts},       {"collected", col},   {"replies", rep},
                {"pending_est", pe},  {"pending_replies", pr}};
  }
  if (const auto* toy = std::get_if<ToyPayload>(&p))
    return json{{"type", "toy"}, {"a", toy->a}, {"b", toy->b}};
  return json{{"type", "none"}};
}

Payload payload_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "ct") {
    CtPayload ct;
    ct.self = j.at("self").get<ProcessId>();
    ct.started = j.at("started").get<bool>();
    ct.round = j.at("round").get<int>();
    ct.phase = j.at("phase").get<int>();
    ct.estimate = j.at("estimate").get<Value>();
    ct.ts = j.at("ts").get<int>();
    for (const auto& e : j.at("collected"))
      ct.collected[e.at("q").get<ProcessId>()] = {e.at("v").get<Value>(),
                                                  e.at("ts").get<int>()};
    for (const auto& e : j.at("replies"))
      ct.replies[e.at("q").get<ProcessId>()] = e.at("ok").get<bool>();
    for (const auto& e : j.at("pending_est"))
      ct.pending_est[e.at("r").get<int>()][e.at("q").get<ProcessId>()] = {
          e.at("v").get<Value>(), e.at("ts").get<int>()};
    for (const auto& e : j.at("pending_replies"))
      ct.pending_replies[e.at("r").get<int>()][e.at("q").get<ProcessId>()] =
          e.at("ok").get<bool>();
    return ct;
  }
  if (type == "toy") return ToyPayload{j.at("a").get<int>(), j.at("b").get<int>()};
  return std::monostate{};
}

}  // namespace

void write_trace_letter(std::ostream& os, long index, const GlobalState& letter,
                        bool verbose) {
  json ps = json::array();
  for (const auto& ls : letter) {
    json e{{"inp", ls.inp}, {"pd", hex64(payload_digest(ls))}};
    if (ls.dec) e["dec"] = *ls.dec;
    else e["dec"] = nullptr;
    if (verbose) e["payload"] = payload_to_json(ls.payload);
    ps.push_back(std::move(e));
  }
  os << json{{"i", index}, {"ps", std::move(ps)}}.dump() << "\n";
}

void write_trace_jsonl(std::ostream& os, const StateTrace& trace, bool verbose) {
  for (std::size_t i = 0; i < trace.size(); ++i)
    write_trace_letter(os, static_cast<long>(i + 1), trace[i], verbose);
}

StateTrace read_trace_jsonl(std::istream& is) {
  StateTrace trace;
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw TraceReadError("line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      GlobalState g;
      for (const auto& e : j.at("ps")) {
        LocalCoreState ls;
        ls.inp = e.at("inp").get<Value>();
        if (!e.at("dec").is_null()) ls.dec = e.at("dec").get<Value>();
        if (e.contains("payload")) ls.payload = payload_from_json(e.at("payload"));
        g.push_back(std::move(ls));
      }
      const long expect = static_cast<long>(trace.size()) + 1;
      if (j.at("i").get<long>() != expect)
        throw TraceReadError("line " + std::to_string(lineno) +
                             ": step index out of sequence");
      trace.push_back(std::move(g));
    } catch (const TraceReadError&) {
      throw;
    } catch (const std::exception& e) {
      throw TraceReadError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (trace.empty()) throw TraceReadError("trace file holds no letters");
  return trace;
}

void write_cs_label(std::ostream& os, long index, const CrashStopLabel& l) {
  json j{{"i", index}, {"p", l.p}};
  if (l.rmsg)
    j["rmsg"] = json{{"from", l.rmsg->sender}, {"m", message_to_json(l.rmsg->m)}};
  else
    j["rmsg"] = nullptr;
  j["fails"] = json::array();
  for (ProcessId p : l.fails) j["fails"].push_back(p);
  j["fdo"] = json::array();
  for (ProcessId p : l.fdo) j["fdo"].push_back(p);
  os << j.dump() << "\n";
}

void write_cr_label_digest(std::ostream& os, long index, const CRLabel& l) {
  os << json{{"i", index}, {"digest", hex64(digest(l))}}.dump() << "\n";
}

}  // namespace crwrap
