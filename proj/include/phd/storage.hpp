#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "phd/rdf.hpp"
#include "phd/sparql.hpp"

namespace phd {

/// One predicate-keyed block of <subject, object> pairs with three access
/// paths (predicate, predicate-subject, predicate-object). A pair lives once
/// in the pool; the three maps hold references into it.
///
/// Backs both a worker's main index and every replica-index edge.
class StorageModule {
 public:
  using PairRef = std::uint32_t;
  struct Pair {
    TermId s = 0;
    TermId o = 0;
  };

  /// Returns false when the triple was already present.
  bool insert(const Triple& t);
  /// Returns false when the triple was absent.
  bool erase(const Triple& t);
  bool contains(const Triple& t) const;

  std::size_t size() const { return live_; }
  bool empty() const { return live_ == 0; }
  void clear();

  std::vector<TermId> predicates() const;

  /// Empty spans for unknown keys.
  std::span<const PairRef> by_predicate(TermId p) const;
  std::span<const PairRef> by_predicate_subject(TermId p, TermId s) const;
  std::span<const PairRef> by_predicate_object(TermId p, TermId o) const;

  const Pair& pair(PairRef r) const { return pool_[r]; }

  /// All stored triples, sorted.
  std::vector<Triple> triples() const;

  /// Checks that the three access paths index the same pair set.
  bool consistent() const;

 private:
  struct Block {
    std::vector<PairRef> all;
    std::unordered_map<std::uint64_t, std::uint32_t> position;  // (s,o) -> index in `all`
    std::unordered_map<TermId, std::vector<PairRef>> by_subject;
    std::unordered_map<TermId, std::vector<PairRef>> by_object;
  };

  static std::uint64_t key(TermId s, TermId o) { return (std::uint64_t{s} << 32) | o; }

  std::vector<Pair> pool_;
  std::vector<PairRef> free_;
  std::unordered_map<TermId, Block> blocks_;
  std::size_t live_ = 0;
};

/// Rows of term ids under a header of variable names. Set semantics are
/// restored by dedup(); producers in this library always call it.
class BindingTable {
 public:
  BindingTable() = default;
  explicit BindingTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  std::size_t arity() const { return header_.size(); }
  std::size_t size() const { return rows_; }
  bool empty() const { return rows_ == 0; }

  std::span<const TermId> row(std::size_t i) const { return {cells_.data() + i * arity(), arity()}; }
  void add_row(std::span<const TermId> r);
  void append(const BindingTable& other);  // headers must match
  void reserve(std::size_t rows) { cells_.reserve(rows * arity()); }

  /// Index of a variable in the header, or -1.
  int column(const std::string& var) const;

  /// Removes duplicate rows and sorts rows (deterministic order).
  void dedup();

  const std::vector<TermId>& cells() const { return cells_; }

 private:
  std::vector<std::string> header_;
  std::vector<TermId> cells_;
  std::size_t rows_ = 0;
};

/// Variables shared between two headers, in the left header's order.
std::vector<std::string> shared_variables(const BindingTable& a, const BindingTable& b);

/// Bindings of a triple pattern with a constant predicate over one module.
/// Header lists the pattern's variables in subject-then-object order.
/// Constants unknown to `dict` simply match nothing.
BindingTable answer_subquery(const StorageModule& module, const Dictionary& dict, const TriplePattern& tp);

/// Like answer_subquery, but a variable predicate is evaluated by a scan over
/// every predicate block. Only the distributed (semi-join) path uses this.
BindingTable scan_subquery(const StorageModule& module, const Dictionary& dict, const TriplePattern& tp);

/// Exact number of triples in `module` matching `tp` (variables unconstrained
/// except repeated ones).
std::size_t count_matches(const StorageModule& module, const Dictionary& dict, const TriplePattern& tp);

/// Natural join on all shared variables. `on` must be a non-empty subset of
/// the shared variables; an empty `on` would be a cartesian product and throws.
BindingTable local_hash_join(const BindingTable& left, const BindingTable& right,
                             const std::vector<std::string>& on);

/// Rows of `table` whose values on `projection`'s header appear in `projection`.
BindingTable semi_join(const BindingTable& table, const BindingTable& projection);

/// Distinct projection onto `vars` (all must be in the header).
BindingTable project(const BindingTable& table, const std::vector<std::string>& vars);

/// Joins a list of tables greedily, always picking the next table that
/// shares a variable with the accumulated result. Zero-arity tables act as
/// boolean filters. Throws UnsupportedQuery if the tables are disconnected.
BindingTable join_all(std::vector<BindingTable> tables);

/// Per-worker main index plus the degree counters used for statistics.
class WorkerStore {
 public:
  Dictionary& dict() { return dict_; }
  const Dictionary& dict() const { return dict_; }
  const StorageModule& main() const { return main_; }

  bool insert_triple(const Triple& t);
  bool insert_triple(const LexTriple& t) { return insert_triple(dict_.intern(t)); }
  bool delete_triple(const Triple& t);
  bool delete_triple(const LexTriple& t);

  /// In-degree plus out-degree over local triples.
  std::uint32_t degree(TermId v) const;
  std::size_t size() const { return main_.size(); }

 private:
  Dictionary dict_;
  StorageModule main_;
  std::unordered_map<TermId, std::uint32_t> degree_;
};

}  // namespace phd
