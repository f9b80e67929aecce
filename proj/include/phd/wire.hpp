#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "phd/rdf.hpp"

namespace phd {

using NodeId = std::uint16_t;
inline constexpr NodeId kMasterId = 0xFFFE;
inline constexpr NodeId kClientId = 0xFFFD;

/// Message tags. Values are part of the wire format.
enum class Tag : std::uint8_t {
  LoadDone = 1,
  StatsReport = 2,
  QueryBroadcast = 3,
  SubqueryProjection = 4,
  CandidateRows = 5,
  PartialResult = 6,
  RedistBegin = 7,
  RedistTriples = 8,
  RedistCommit = 9,
  RedistAbort = 10,
  UpdateBatch = 11,
  ValidationRequest = 12,
  ValidationRows = 13,
  Ack = 14,
  // Commands and replies beyond the core protocol.
  LoadTriples = 20,
  StatsRequest = 21,
  CardinalityRequest = 22,
  CardinalityReply = 23,
  SemiJoinStep = 24,
  ResultRequest = 25,
  RedistLevel = 26,
  RedistProjection = 27,
  InsertLevel = 28,
  MetricsRequest = 29,
  MetricsReply = 30,
  DumpRequest = 31,
  DumpReply = 32,
  InjectFault = 33,
  Fault = 34,
  Register = 40,
  PeerDirectory = 41,
  Shutdown = 42,
  ClientRequest = 43,
  ClientReply = 44,
};

inline constexpr std::size_t kTagSlots = 64;

const char* tag_name(Tag t);

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Message {
  Tag tag = Tag::Ack;
  NodeId sender = 0;
  std::uint32_t op = 0;  // cluster operation this message belongs to
  std::string payload;
};

/// Frame: u32 big-endian length of everything after it, u8 tag,
/// u16 big-endian sender, u32 big-endian op, payload bytes.
inline constexpr std::size_t kFrameHeader = 4 + 1 + 2 + 4;

std::string encode_frame(const Message& m);
/// Decodes one complete frame (length prefix included).
Message decode_frame(std::string_view frame);

/// Big-endian payload writer. Strings carry a u16 length prefix.
class Writer {
 public:
  Writer& u8(std::uint8_t v);
  Writer& u16(std::uint16_t v);
  Writer& u32(std::uint32_t v);
  Writer& u64(std::uint64_t v);
  Writer& f64(double v);
  Writer& str(std::string_view s);
  Writer& blob(std::string_view s);  // u32 length prefix
  Writer& strings(const std::vector<std::string>& v);
  Writer& triple(const LexTriple& t);
  Writer& triples(const std::vector<LexTriple>& v);

  std::string take() { return std::move(buf_); }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  std::string blob();
  std::vector<std::string> strings();
  LexTriple triple();
  std::vector<LexTriple> triples();
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view need(std::size_t n);
  std::string_view data_;
  std::size_t pos_ = 0;
};

/// Table of lexical rows, the dictionary-free form of a BindingTable.
struct LexTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(Writer& w) const;
  static LexTable read(Reader& r);
};

}  // namespace phd
