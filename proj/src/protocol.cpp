#include "phd/protocol.hpp"

namespace phd {

namespace {

void write_term(Writer& w, const PatternTerm& t) { w.str(t.text).u8(t.variable ? 1 : 0); }

PatternTerm read_term(Reader& r) {
  PatternTerm t;
  t.text = r.str();
  t.variable = r.u8() != 0;
  return t;
}

}  // namespace

void write_pattern(Writer& w, const TriplePattern& tp) {
  write_term(w, tp.s);
  write_term(w, tp.p);
  write_term(w, tp.o);
}

TriplePattern read_pattern(Reader& r) {
  TriplePattern tp;
  tp.s = read_term(r);
  tp.p = read_term(r);
  tp.o = read_term(r);
  return tp;
}

void write_patterns(Writer& w, const std::vector<TriplePattern>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& tp : v) write_pattern(w, tp);
}

std::vector<TriplePattern> read_patterns(Reader& r) {
  std::vector<TriplePattern> v(r.u32());
  for (auto& tp : v) tp = read_pattern(r);
  return v;
}

void write_edge(Writer& w, const IndexEdge& e) {
  w.u32(e.id).u32(e.parent).str(e.root_label).str(e.predicate);
  w.u8(static_cast<std::uint8_t>(e.direction)).str(e.child_label).u16(static_cast<std::uint16_t>(e.level));
  w.u8(e.active ? 1 : 0);
}

IndexEdge read_edge(Reader& r) {
  IndexEdge e;
  e.id = r.u32();
  e.parent = r.u32();
  e.root_label = r.str();
  e.predicate = r.str();
  e.direction = static_cast<Direction>(r.u8());
  e.child_label = r.str();
  e.level = r.u16();
  e.active = r.u8() != 0;
  return e;
}

void write_ids(Writer& w, const std::vector<EdgeId>& ids) {
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (auto id : ids) w.u32(id);
}

std::vector<EdgeId> read_ids(Reader& r) {
  std::vector<EdgeId> ids(r.u32());
  for (auto& id : ids) id = r.u32();
  return ids;
}

void write_edge_values(Writer& w, const EdgeValues& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& [id, vals] : v) w.u32(id).strings(vals);
}

EdgeValues read_edge_values(Reader& r) {
  EdgeValues v(r.u32());
  for (auto& [id, vals] : v) {
    id = r.u32();
    vals = r.strings();
  }
  return v;
}

void write_edge_triples(Writer& w, const EdgeTriples& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& [id, ts] : v) w.u32(id).triples(ts);
}

EdgeTriples read_edge_triples(Reader& r) {
  EdgeTriples v(r.u32());
  for (auto& [id, ts] : v) {
    id = r.u32();
    ts = r.triples();
  }
  return v;
}

}  // namespace phd
