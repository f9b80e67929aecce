#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phd/sparql.hpp"
#include "phd/stats.hpp"

namespace phd {

/// Every vertex of the query scored -inf: the query has no usable core and
/// stays on the semi-join path.
class NoCoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Redistribution tree

struct TreeEdge {
  std::size_t pattern = 0;  // index of the query pattern / graph edge
  int parent = -1;          // index into RedistTree::edges, -1 at level 1
  std::size_t parent_vertex = 0;
  std::size_t child_vertex = 0;
  Direction direction = Direction::Forward;
  std::string predicate;
  int level = 1;
};

/// Spanning decomposition of a query graph rooted at the core vertex. Every
/// query edge appears exactly once; vertices may repeat. Edges are stored in
/// extraction order, so a parent always precedes its children.
struct RedistTree {
  std::vector<PatternTerm> vertices;  // copy of the graph's vertices
  std::vector<TriplePattern> patterns;
  std::size_t root = 0;
  std::vector<TreeEdge> edges;
  int levels = 0;

  const PatternTerm& root_term() const { return vertices[root]; }
  const PatternTerm& child_term(std::size_t e) const { return vertices[edges[e].child_vertex]; }
  const PatternTerm& parent_term(std::size_t e) const { return vertices[edges[e].parent_vertex]; }
  std::vector<std::size_t> children(int parent) const;
};

/// argmax vertex score; ties go to the lexicographically smallest vertex text.
std::size_t select_core(const QueryGraph& g);

/// Grows the tree from the core, always extending the pending edge whose far
/// vertex has the highest score (ties: predicate lexical, then insertion order).
RedistTree build_redistribution_tree(const QueryGraph& g, std::size_t core);

/// Convenience: score, pick the core and build the tree.
RedistTree plan_tree(const BgpQuery& q, const GlobalStats& stats);

// ---------------------------------------------------------------------------
// Query / replica index structure

using EdgeId = std::uint32_t;
inline constexpr EdgeId kNoEdge = 0xFFFFFFFFu;
inline constexpr const char* kWildcard = "?";

/// Label of a tree node in the index: "?" for variables, else the constant.
std::string index_label(const PatternTerm& t);

struct IndexEdge {
  EdgeId id = 0;
  EdgeId parent = kNoEdge;
  std::string root_label;  // label of the tree root this edge hangs under
  std::string predicate;
  Direction direction = Direction::Forward;
  std::string child_label;
  int level = 1;
  bool active = false;  // staged edges are inactive until commit

  /// Structural identity, ignoring `active`.
  friend bool operator==(const IndexEdge& a, const IndexEdge& b) {
    return a.id == b.id && a.parent == b.parent && a.root_label == b.root_label && a.predicate == b.predicate &&
           a.direction == b.direction && a.child_label == b.child_label && a.level == b.level;
  }
};

/// The labeled forest shared by the master's query index and every worker's
/// replica index. Children of a node are unique by (predicate, direction,
/// child label).
class IndexStructure {
 public:
  const std::vector<IndexEdge>& edges() const { return edges_; }
  const IndexEdge* find(EdgeId id) const;
  IndexEdge* find(EdgeId id);

  /// Child edge with exactly this key (active or staged).
  std::optional<EdgeId> find_child(EdgeId parent, const std::string& root_label, const std::string& predicate,
                                   Direction dir, const std::string& child_label) const;
  std::vector<EdgeId> children(EdgeId id) const;

  void add(IndexEdge e);
  void activate(const std::vector<EdgeId>& ids);
  void remove(const std::vector<EdgeId>& ids);
  EdgeId next_id() const { return next_id_; }
  std::size_t active_size() const;

  /// Structure of the active edges, sorted by id.
  std::vector<IndexEdge> active_edges() const;

 private:
  std::vector<IndexEdge> edges_;
  EdgeId next_id_ = 0;
};

/// Mapping of every tree edge onto an index edge.
struct Embedding {
  std::string root_label;
  std::vector<EdgeId> edge_of;  // parallel to RedistTree::edges
};

/// Level-by-level embedding of the tree into the index. Index wildcards cover
/// any query label; index constants cover only the same constant.
std::optional<Embedding> check_parallel_eligibility(const RedistTree& tree, const IndexStructure& index);

/// A label in the index covers a query term.
bool label_covers(const std::string& index_label, const PatternTerm& query_term);

// ---------------------------------------------------------------------------
// Join ordering

struct JoinPlan {
  std::vector<std::size_t> order;                // pattern indices
  std::vector<std::vector<std::string>> on;      // join variables per step; on[0] is empty
};

/// Right-deep chain starting from the least-cardinality pattern; each next
/// step is the cheapest pattern sharing a variable with the prefix. Ties go to
/// the earlier pattern.
JoinPlan order_joins(const BgpQuery& q, const std::vector<std::size_t>& cardinalities);

}  // namespace phd
