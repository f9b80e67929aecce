#include <gtest/gtest.h>

#include <thread>

#include <cmath>

#include "phd/config.hpp"
#include "phd/rdf.hpp"
#include "phd/hashing.hpp"
#include "phd/metrics.hpp"
#include "phd/transport.hpp"
#include "phd/wire.hpp"

using namespace phd;
using namespace std::chrono_literals;

TEST(Frame, LayoutIsBigEndian) {
  const auto f = encode_frame(Message{Tag::QueryBroadcast, 0x0102, 0x03040506, "xy"});
  ASSERT_EQ(f.size(), kFrameHeader + 2);
  const std::string want("\x00\x00\x00\x09\x03\x01\x02\x03\x04\x05\x06xy", 13);
  EXPECT_EQ(f, want);
  const auto m = decode_frame(f);
  EXPECT_EQ(m.tag, Tag::QueryBroadcast);
  EXPECT_EQ(m.sender, 0x0102);
  EXPECT_EQ(m.op, 0x03040506u);
  EXPECT_EQ(m.payload, "xy");
}

TEST(Frame, RejectsMalformed) {
  EXPECT_THROW(decode_frame("abc"), WireError);
  auto f = encode_frame(Message{Tag::Ack, 1, 1, "payload"});
  f.pop_back();
  EXPECT_THROW(decode_frame(f), WireError);
}

TEST(Payload, RoundTrip) {
  Writer w;
  w.u8(7).u16(65535).u32(1u << 31).u64(~0ull).f64(3.25).str("Stanford-CS").blob(std::string(70000, 'x'));
  w.strings({"?a", "?b"}).triples({{"a", "b", "c"}});
  LexTable{{"?x", "?y"}, {{"1", "2"}, {"3", "4"}}}.write(w);
  Reader r(w.bytes());
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u16(), 65535);
  EXPECT_EQ(r.u32(), 1u << 31);
  EXPECT_EQ(r.u64(), ~0ull);
  EXPECT_EQ(r.f64(), 3.25);
  EXPECT_EQ(r.str(), "Stanford-CS");
  EXPECT_EQ(r.blob().size(), 70000u);
  EXPECT_EQ(r.strings(), (std::vector<std::string>{"?a", "?b"}));
  EXPECT_EQ(r.triples(), (std::vector<LexTriple>{{"a", "b", "c"}}));
  const auto t = LexTable::read(r);
  EXPECT_EQ(t.rows[1][0], "3");
  EXPECT_TRUE(r.done());
  EXPECT_THROW(r.u8(), WireError);
}

TEST(Payload, LongTermRejected) {
  Writer w;
  EXPECT_THROW(w.str(std::string(70000, 'a')), WireError);
}

TEST(Hashing, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(Hashing, PinsOverrideHash) {
  Placement p(2);
  p.load_pins("# comment\nStanford* 0\nMIT* 1\nMIT-Media 0\n");
  EXPECT_EQ(p.worker_of("Stanford"), 0u);
  EXPECT_EQ(p.worker_of("Stanford-ENG"), 0u);
  EXPECT_EQ(p.worker_of("MIT-CS"), 1u);
  EXPECT_EQ(p.worker_of("MIT-Media"), 0u);
  EXPECT_EQ(p.worker_of("Lisa"), fnv1a64("Lisa") % 2);
  EXPECT_THROW(p.pin("X", 2), InputError);
  EXPECT_THROW(p.load_pins("X\n"), InputError);
}

TEST(Hashing, LongestPrefixWins) {
  Placement p(4);
  p.pin("S*", 1);
  p.pin("Stan*", 3);
  EXPECT_EQ(p.worker_of("Stanford"), 3u);
  EXPECT_EQ(p.worker_of("Sun"), 1u);
}

TEST(ConfigTest, ParseAndOverride) {
  Config c;
  c.parse("# c\nworkers = 4\nrho_max=inf\n\nseed=9\n");
  c.set("workers=2");
  EXPECT_EQ(c.get_int("workers", 0), 2);
  EXPECT_TRUE(std::isinf(c.get_double("rho_max", 0)));
  EXPECT_EQ(c.get("transport", "inproc"), "inproc");
  EXPECT_THROW(c.set("novalue"), InputError);
  c.set("seed=abc");
  EXPECT_THROW(c.get_int("seed", 0), InputError);
}

TEST(Gini, KnownValues) {
  const std::vector<std::uint64_t> balanced{5, 5, 5, 5}, one{20, 0, 0, 0}, zero{0, 0, 0};
  EXPECT_DOUBLE_EQ(gini(balanced), 0.0);
  EXPECT_DOUBLE_EQ(gini(one), 0.75);
  EXPECT_DOUBLE_EQ(gini(zero), 0.0);
  const std::vector<double> two{1, 3};  // |1-3|*2 / (2*4*2) = 0.25
  EXPECT_DOUBLE_EQ(gini(two), 0.25);
}

TEST(LinkClasses, Classification) {
  EXPECT_EQ(classify_link(1, 1), LinkClass::Loopback);
  EXPECT_EQ(classify_link(1, 2), LinkClass::Remote);
  EXPECT_EQ(classify_link(kMasterId, 2), LinkClass::Control);
  EXPECT_EQ(classify_link(3, kClientId), LinkClass::Control);
}

TEST(Inproc, ByteAndFrameAccounting) {
  InprocNetwork net;
  auto a = net.endpoint(0), b = net.endpoint(1), m = net.endpoint(kMasterId);
  a->send(1, Tag::SubqueryProjection, 1, "abcd");
  a->send(0, Tag::SubqueryProjection, 1, "ab");
  m->send(1, Tag::QueryBroadcast, 1, "");
  const auto ta = a->meter().snapshot();
  EXPECT_EQ(ta.remote.frames_of(Tag::SubqueryProjection), 1u);
  EXPECT_EQ(ta.remote.bytes_of(Tag::SubqueryProjection), kFrameHeader + 4);
  EXPECT_EQ(ta.loopback.bytes_of(Tag::SubqueryProjection), kFrameHeader + 2);
  EXPECT_EQ(m->meter().snapshot().control.frames_of(Tag::QueryBroadcast), 1u);
  EXPECT_EQ(b->collect(1, Tag::SubqueryProjection, 1, 1000ms)[0].payload, "abcd");
  EXPECT_EQ(a->collect(1, Tag::SubqueryProjection, 1, 1000ms)[0].payload, "ab");
}

TEST(Barrier, StashesFutureAndDropsStale) {
  InprocNetwork net;
  auto a = net.endpoint(0), b = net.endpoint(1);
  a->send(1, Tag::CandidateRows, 5, "later");
  a->send(1, Tag::CandidateRows, 3, "stale");
  a->send(1, Tag::CandidateRows, 4, "now");
  const auto got = b->collect(4, Tag::CandidateRows, 1, 1000ms);
  EXPECT_EQ(got[0].payload, "now");
  EXPECT_EQ(b->collect(5, Tag::CandidateRows, 1, 1000ms)[0].payload, "later");
  EXPECT_THROW(b->collect(3, Tag::CandidateRows, 1, 50ms), BarrierTimeout);
}

TEST(Barrier, TimeoutAndFault) {
  InprocNetwork net;
  auto a = net.endpoint(0), b = net.endpoint(1);
  EXPECT_THROW(b->collect(1, Tag::Ack, 1, 30ms), BarrierTimeout);
  a->send(1, Tag::Fault, 2, "boom");
  try {
    b->collect(2, Tag::Ack, 1, 1000ms);
    FAIL();
  } catch (const RemoteFault& f) {
    EXPECT_EQ(f.node(), 0);
  }
}

TEST(Barrier, CommandsComeFromMasterOnly) {
  InprocNetwork net;
  auto w = net.endpoint(0), peer = net.endpoint(1), m = net.endpoint(kMasterId);
  peer->send(0, Tag::SubqueryProjection, 7, "p");
  m->send(0, Tag::QueryBroadcast, 7, "q");
  const auto c = w->next_command(1000ms);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->tag, Tag::QueryBroadcast);
  EXPECT_EQ(w->collect(7, Tag::SubqueryProjection, 1, 1000ms)[0].payload, "p");
  EXPECT_FALSE(w->next_command(20ms));
}

TEST(Tcp, FramesAndCountsMatchInproc) {
  TcpEndpoint a(0, Address{"127.0.0.1", 0}), b(1, Address{"127.0.0.1", 0});
  a.set_address(1, Address{"127.0.0.1", b.port()});
  b.set_address(0, Address{"127.0.0.1", a.port()});
  a.send(1, Tag::CandidateRows, 1, std::string(100000, 'z'));
  const auto got = b.collect(1, Tag::CandidateRows, 1, 5000ms);
  EXPECT_EQ(got[0].payload.size(), 100000u);
  EXPECT_EQ(got[0].sender, 0);
  b.send(0, Tag::Ack, 1, "ok");
  EXPECT_EQ(a.collect(1, Tag::Ack, 1, 5000ms)[0].payload, "ok");
  EXPECT_EQ(a.meter().snapshot().remote.bytes_of(Tag::CandidateRows), kFrameHeader + 100000);
  a.close();
  b.close();
}

TEST(Tcp, ParseAddress) {
  const auto a = parse_address("10.0.0.1:7000");
  EXPECT_EQ(a.host, "10.0.0.1");
  EXPECT_EQ(a.port, 7000);
  EXPECT_ANY_THROW(parse_address("nohost"));
}
