#include "crwrap/types.hpp"

#include <cstring>
#include <sstream>

namespace crwrap {

void StableHash::bytes(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    state ^= p[i];
    state *= 0x100000001b3ULL;
  }
}

void StableHash::u64(std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  bytes(buf, 8);
}

std::uint64_t digest(const Message& m) {
  StableHash h;
  h.i64(m.kind);
  h.i64(m.round);
  h.i64(m.value);
  h.i64(m.ts);
  return h.state;
}

std::uint64_t payload_digest(const LocalCoreState& s) {
  StableHash h;
  h.i64(s.inp);
  h.opt_i64(s.dec);
  h.u64(s.payload.index());
  if (const auto* ct = std::get_if<CtPayload>(&s.payload)) {
    h.i64(ct->round);
    h.i64(ct->phase);
    h.i64(ct->estimate);
    h.i64(ct->ts);
    h.u64(ct->started ? 1 : 0);
  } else if (const auto* toy = std::get_if<ToyPayload>(&s.payload)) {
    h.i64(toy->a);
    h.i64(toy->b);
  }
  return h.state;
}

std::uint64_t digest(const GlobalState& s) {
  StableHash h;
  h.u64(s.size());
  for (const auto& ls : s) h.u64(payload_digest(ls));
  return h.state;
}

std::string to_string(const Message& m) {
  std::ostringstream os;
  switch (m.kind) {
    case msg::kEstimate: os << "est"; break;
    case msg::kPropose: os << "prop"; break;
    case msg::kAck: os << "ack"; break;
    case msg::kNack: os << "nack"; break;
    case msg::kDecide: os << "decide"; break;
    case msg::kPing: os << "ping"; break;
    default: os << "m" << m.kind; break;
  }
  os << "(r=" << m.round << ",v=" << m.value << ",ts=" << m.ts << ")";
  return os.str();
}

std::string to_string(const LocalCoreState& s) {
  std::ostringstream os;
  os << "{inp=" << s.inp << ",dec=";
  if (s.dec) os << *s.dec; else os << "_";
  if (const auto* ct = std::get_if<CtPayload>(&s.payload)) {
    os << ",r=" << ct->round << ",ph=" << ct->phase << ",est=" << ct->estimate
       << ",ts=" << ct->ts;
  }
  os << "}";
  return os.str();
}

}  // namespace crwrap
