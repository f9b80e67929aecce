#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "phd/planner.hpp"
#include "phd/storage.hpp"

namespace phd {

/// Label of the parent side of an index edge: the root label at level 1,
/// otherwise the parent edge's child label.
const std::string& parent_label(const IndexStructure& idx, const IndexEdge& e);

/// Parent (tree-side) and child term of a triple under an edge direction.
inline TermId parent_side(const Triple& t, Direction d) { return d == Direction::Forward ? t.s : t.o; }
inline TermId child_side(const Triple& t, Direction d) { return d == Direction::Forward ? t.o : t.s; }
inline const std::string& parent_side(const LexTriple& t, Direction d) { return d == Direction::Forward ? t.s : t.o; }
inline const std::string& child_side(const LexTriple& t, Direction d) { return d == Direction::Forward ? t.o : t.s; }

/// Whether a triple matches the subquery of an index edge (predicate and
/// both labels; a wildcard label matches anything).
bool edge_accepts(const IndexStructure& idx, const IndexEdge& e, const LexTriple& t);

/// Triples of `m` matching edge `e`. With `parent_value`, only triples whose
/// parent side equals it.
std::vector<Triple> edge_matches(const StorageModule& m, const Dictionary& dict, const IndexStructure& idx,
                                 const IndexEdge& e, std::optional<TermId> parent_value = std::nullopt);

/// Whether some triple of `m` (holding only e's predicate) has this child value.
bool has_child_value(const StorageModule& m, const IndexEdge& e, TermId predicate, TermId value);

/// A worker's replica index: the shared structure plus one module per edge.
struct ReplicaIndex {
  IndexStructure structure;
  std::map<EdgeId, StorageModule> modules;

  /// Triples over active edges.
  std::size_t triple_count() const;
  StorageModule& module(EdgeId id) { return modules[id]; }
  const StorageModule* find_module(EdgeId id) const;

  /// Distinct child-side values in an edge's module.
  std::set<TermId> child_values(EdgeId id) const;
};

}  // namespace phd
