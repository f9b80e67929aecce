#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "phd/wire.hpp"

namespace phd {

/// Per-tag frame and byte counters for one link class.
struct TagCounters {
  std::array<std::uint64_t, kTagSlots> frames{};
  std::array<std::uint64_t, kTagSlots> bytes{};

  std::uint64_t frames_of(Tag t) const { return frames[static_cast<std::size_t>(t)]; }
  std::uint64_t bytes_of(Tag t) const { return bytes[static_cast<std::size_t>(t)]; }
  std::uint64_t total_frames() const;
  std::uint64_t total_bytes() const;

  TagCounters& operator+=(const TagCounters& o);
  friend TagCounters operator-(TagCounters a, const TagCounters& b);
};

/// Link classes. Loopback: a node sending to itself. Remote: one worker to a
/// different worker. Control: anything to or from the master or a client.
struct Traffic {
  TagCounters loopback;
  TagCounters remote;
  TagCounters control;

  Traffic& operator+=(const Traffic& o);
  friend Traffic operator-(Traffic a, const Traffic& b);

  void write(Writer& w) const;
  static Traffic read(Reader& r);
};

enum class LinkClass { Loopback, Remote, Control };
LinkClass classify_link(NodeId from, NodeId to);

/// Thread-safe traffic accounting of one endpoint (counted at the sender).
class TrafficMeter {
 public:
  void record(Tag tag, NodeId from, NodeId to, std::size_t frame_bytes);
  Traffic snapshot() const;

 private:
  mutable std::mutex mu_;
  Traffic traffic_;
};

/// Population Gini coefficient: sum_ij |x_i - x_j| / (2 n^2 mean).
/// All-zero or empty input gives 0.
double gini(std::span<const double> xs);
double gini(std::span<const std::uint64_t> xs);

struct Metrics {
  Traffic traffic;  // cluster-wide, summed over every node
  std::vector<std::uint64_t> main_counts;
  std::vector<std::uint64_t> replica_counts;
  double replication_ratio = 0.0;
  double gini_main = 0.0;
  double gini_replica = 0.0;
  std::uint64_t duplicate_partial_rows = 0;  // parallel-mode disjointness violations

  std::string to_text() const;
};

}  // namespace phd
