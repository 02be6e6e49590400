#pragma once

#include <iosfwd>
#include <string>

#include "crwrap/cr_model.hpp"
#include "crwrap/crash_stop.hpp"
#include "crwrap/types.hpp"

namespace crwrap {

// One JSON record per trace letter: {"i": step, "ps": [{"inp","dec","pd"}...]}.
// With `verbose` the full payload is embedded and can be restored on read;
// otherwise only the stable payload digest travels.
void write_trace_letter(std::ostream& os, long index, const GlobalState& letter,
                        bool verbose);
void write_trace_jsonl(std::ostream& os, const StateTrace& trace, bool verbose);

struct TraceReadError : std::runtime_error {
  explicit TraceReadError(const std::string& what) : std::runtime_error(what) {}
};

// Throws TraceReadError with a line position on malformed input.
StateTrace read_trace_jsonl(std::istream& is);

void write_cs_label(std::ostream& os, long index, const CrashStopLabel& l);
void write_cr_label_digest(std::ostream& os, long index, const CRLabel& l);

std::string hex64(std::uint64_t v);

}  // namespace crwrap
