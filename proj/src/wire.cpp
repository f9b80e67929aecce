#include "phd/wire.hpp"

#include <bit>
#include <cstring>

namespace phd {

const char* tag_name(Tag t) {
  switch (t) {
    case Tag::LoadDone: return "LoadDone";
    case Tag::StatsReport: return "StatsReport";
    case Tag::QueryBroadcast: return "QueryBroadcast";
    case Tag::SubqueryProjection: return "SubqueryProjection";
    case Tag::CandidateRows: return "CandidateRows";
    case Tag::PartialResult: return "PartialResult";
    case Tag::RedistBegin: return "RedistBegin";
    case Tag::RedistTriples: return "RedistTriples";
    case Tag::RedistCommit: return "RedistCommit";
    case Tag::RedistAbort: return "RedistAbort";
    case Tag::UpdateBatch: return "UpdateBatch";
    case Tag::ValidationRequest: return "ValidationRequest";
    case Tag::ValidationRows: return "ValidationRows";
    case Tag::Ack: return "Ack";
    case Tag::LoadTriples: return "LoadTriples";
    case Tag::StatsRequest: return "StatsRequest";
    case Tag::CardinalityRequest: return "CardinalityRequest";
    case Tag::CardinalityReply: return "CardinalityReply";
    case Tag::SemiJoinStep: return "SemiJoinStep";
    case Tag::ResultRequest: return "ResultRequest";
    case Tag::RedistLevel: return "RedistLevel";
    case Tag::RedistProjection: return "RedistProjection";
    case Tag::InsertLevel: return "InsertLevel";
    case Tag::MetricsRequest: return "MetricsRequest";
    case Tag::MetricsReply: return "MetricsReply";
    case Tag::DumpRequest: return "DumpRequest";
    case Tag::DumpReply: return "DumpReply";
    case Tag::InjectFault: return "InjectFault";
    case Tag::Fault: return "Fault";
    case Tag::Register: return "Register";
    case Tag::PeerDirectory: return "PeerDirectory";
    case Tag::Shutdown: return "Shutdown";
    case Tag::ClientRequest: return "ClientRequest";
    case Tag::ClientReply: return "ClientReply";
  }
  return "Unknown";
}

namespace {

void put_be(std::string& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_be(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)]);
  return v;
}

}  // namespace

std::string encode_frame(const Message& m) {
  const std::size_t body = kFrameHeader - 4 + m.payload.size();
  if (body > 0xFFFFFFFFu) throw WireError("frame too large");
  std::string out;
  out.reserve(4 + body);
  put_be(out, body, 4);
  put_be(out, static_cast<std::uint8_t>(m.tag), 1);
  put_be(out, m.sender, 2);
  put_be(out, m.op, 4);
  out += m.payload;
  return out;
}

Message decode_frame(std::string_view frame) {
  if (frame.size() < kFrameHeader) throw WireError("short frame");
  const auto body = get_be(frame, 0, 4);
  if (body + 4 != frame.size()) throw WireError("frame length mismatch");
  Message m;
  m.tag = static_cast<Tag>(get_be(frame, 4, 1));
  m.sender = static_cast<NodeId>(get_be(frame, 5, 2));
  m.op = static_cast<std::uint32_t>(get_be(frame, 7, 4));
  m.payload.assign(frame.substr(kFrameHeader));
  return m;
}

Writer& Writer::u8(std::uint8_t v) {
  put_be(buf_, v, 1);
  return *this;
}
Writer& Writer::u16(std::uint16_t v) {
  put_be(buf_, v, 2);
  return *this;
}
Writer& Writer::u32(std::uint32_t v) {
  put_be(buf_, v, 4);
  return *this;
}
Writer& Writer::u64(std::uint64_t v) {
  put_be(buf_, v, 8);
  return *this;
}
Writer& Writer::f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

Writer& Writer::str(std::string_view s) {
  if (s.size() > 0xFFFF) throw WireError("term longer than 65535 bytes");
  u16(static_cast<std::uint16_t>(s.size()));
  buf_.append(s);
  return *this;
}

Writer& Writer::blob(std::string_view s) {
  if (s.size() > 0xFFFFFFFFu) throw WireError("blob too large");
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.append(s);
  return *this;
}

Writer& Writer::strings(const std::vector<std::string>& v) {
  u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v) str(s);
  return *this;
}

Writer& Writer::triple(const LexTriple& t) { return str(t.s).str(t.p).str(t.o); }

Writer& Writer::triples(const std::vector<LexTriple>& v) {
  u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& t : v) triple(t);
  return *this;
}

std::string_view Reader::need(std::size_t n) {
  if (pos_ + n > data_.size()) throw WireError("truncated payload");
  auto s = data_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::uint8_t Reader::u8() { return static_cast<std::uint8_t>(get_be(need(1), 0, 1)); }
std::uint16_t Reader::u16() { return static_cast<std::uint16_t>(get_be(need(2), 0, 2)); }
std::uint32_t Reader::u32() { return static_cast<std::uint32_t>(get_be(need(4), 0, 4)); }
std::uint64_t Reader::u64() { return get_be(need(8), 0, 8); }
double Reader::f64() { return std::bit_cast<double>(u64()); }

std::string Reader::str() {
  const auto n = u16();
  return std::string(need(n));
}

std::string Reader::blob() {
  const auto n = u32();
  return std::string(need(n));
}

std::vector<std::string> Reader::strings() {
  const auto n = u32();
  std::vector<std::string> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(str());
  return out;
}

LexTriple Reader::triple() {
  LexTriple t;
  t.s = str();
  t.p = str();
  t.o = str();
  return t;
}

std::vector<LexTriple> Reader::triples() {
  const auto n = u32();
  std::vector<LexTriple> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(triple());
  return out;
}

void LexTable::write(Writer& w) const {
  w.strings(header);
  w.u32(static_cast<std::uint32_t>(rows.size()));
  for (const auto& row : rows) {
    for (const auto& cell : row) w.str(cell);
  }
}

LexTable LexTable::read(Reader& r) {
  LexTable t;
  t.header = r.strings();
  const auto n = r.u32();
  t.rows.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::vector<std::string> row;
    row.reserve(t.header.size());
    for (std::size_t c = 0; c < t.header.size(); ++c) row.push_back(r.str());
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace phd
