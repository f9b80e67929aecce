#include "phd/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace phd {

std::uint64_t TagCounters::total_frames() const {
  std::uint64_t n = 0;
  for (auto f : frames) n += f;
  return n;
}

std::uint64_t TagCounters::total_bytes() const {
  std::uint64_t n = 0;
  for (auto b : bytes) n += b;
  return n;
}

TagCounters& TagCounters::operator+=(const TagCounters& o) {
  for (std::size_t i = 0; i < kTagSlots; ++i) {
    frames[i] += o.frames[i];
    bytes[i] += o.bytes[i];
  }
  return *this;
}

TagCounters operator-(TagCounters a, const TagCounters& b) {
  for (std::size_t i = 0; i < kTagSlots; ++i) {
    a.frames[i] -= b.frames[i];
    a.bytes[i] -= b.bytes[i];
  }
  return a;
}

Traffic& Traffic::operator+=(const Traffic& o) {
  loopback += o.loopback;
  remote += o.remote;
  control += o.control;
  return *this;
}

Traffic operator-(Traffic a, const Traffic& b) {
  a.loopback = a.loopback - b.loopback;
  a.remote = a.remote - b.remote;
  a.control = a.control - b.control;
  return a;
}

namespace {

void write_counters(Writer& w, const TagCounters& c) {
  std::uint16_t used = 0;
  for (std::size_t i = 0; i < kTagSlots; ++i) used += c.frames[i] != 0;
  w.u16(used);
  for (std::size_t i = 0; i < kTagSlots; ++i) {
    if (c.frames[i] == 0) continue;
    w.u8(static_cast<std::uint8_t>(i)).u64(c.frames[i]).u64(c.bytes[i]);
  }
}

TagCounters read_counters(Reader& r) {
  TagCounters c;
  const auto used = r.u16();
  for (std::uint16_t k = 0; k < used; ++k) {
    const auto i = r.u8();
    if (i >= kTagSlots) throw WireError("tag slot out of range");
    c.frames[i] = r.u64();
    c.bytes[i] = r.u64();
  }
  return c;
}

}  // namespace

void Traffic::write(Writer& w) const {
  write_counters(w, loopback);
  write_counters(w, remote);
  write_counters(w, control);
}

Traffic Traffic::read(Reader& r) {
  Traffic t;
  t.loopback = read_counters(r);
  t.remote = read_counters(r);
  t.control = read_counters(r);
  return t;
}

LinkClass classify_link(NodeId from, NodeId to) {
  if (from == to) return LinkClass::Loopback;
  const bool worker_from = from < kClientId, worker_to = to < kClientId;
  return worker_from && worker_to ? LinkClass::Remote : LinkClass::Control;
}

void TrafficMeter::record(Tag tag, NodeId from, NodeId to, std::size_t frame_bytes) {
  const auto slot = static_cast<std::size_t>(tag) % kTagSlots;
  std::lock_guard lock(mu_);
  TagCounters* c = &traffic_.control;
  switch (classify_link(from, to)) {
    case LinkClass::Loopback: c = &traffic_.loopback; break;
    case LinkClass::Remote: c = &traffic_.remote; break;
    case LinkClass::Control: break;
  }
  c->frames[slot] += 1;
  c->bytes[slot] += frame_bytes;
}

Traffic TrafficMeter::snapshot() const {
  std::lock_guard lock(mu_);
  return traffic_;
}

double gini(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  if (sum == 0.0) return 0.0;
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  double diff = 0.0;
  for (double a : xs) {
    for (double b : xs) diff += std::abs(a - b);
  }
  return diff / (2.0 * n * n * mean);
}

double gini(std::span<const std::uint64_t> xs) {
  std::vector<double> d(xs.begin(), xs.end());
  return gini(std::span<const double>(d));
}

std::string Metrics::to_text() const {
  std::ostringstream out;
  out << std::setprecision(6);
  auto counts = [&](const char* name, const std::vector<std::uint64_t>& v) {
    out << name;
    for (auto c : v) out << ' ' << c;
    out << '\n';
  };
  counts("main_triples", main_counts);
  counts("replica_triples", replica_counts);
  out << "replication_ratio " << replication_ratio << '\n';
  out << "gini_main " << gini_main << '\n';
  out << "gini_replica " << gini_replica << '\n';
  out << "duplicate_partial_rows " << duplicate_partial_rows << '\n';
  auto section = [&](const char* name, const TagCounters& c) {
    out << name << " frames=" << c.total_frames() << " bytes=" << c.total_bytes() << '\n';
    for (std::size_t i = 0; i < kTagSlots; ++i) {
      if (c.frames[i] == 0) continue;
      out << "  " << tag_name(static_cast<Tag>(i)) << " frames=" << c.frames[i] << " bytes=" << c.bytes[i] << '\n';
    }
  };
  section("loopback", traffic.loopback);
  section("remote", traffic.remote);
  section("control", traffic.control);
  return out.str();
}

}  // namespace phd
