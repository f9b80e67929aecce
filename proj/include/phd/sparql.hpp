#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "phd/rdf.hpp"

namespace phd {

/// Query text could not be parsed. `position` is a byte offset into the text.
class SyntaxError : public InputError {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : InputError(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// The query parsed but is outside what the engine evaluates (for example a
/// disconnected pattern graph, which would need a cartesian product).
class UnsupportedQuery : public InputError {
 public:
  using InputError::InputError;
};

struct PatternTerm {
  std::string text;  // variables keep their leading '?'
  bool variable = false;

  static PatternTerm var(std::string name) { return {std::move(name), true}; }
  static PatternTerm constant(std::string lexical) { return {std::move(lexical), false}; }
  static PatternTerm from_token(std::string_view token);

  friend bool operator==(const PatternTerm&, const PatternTerm&) = default;
  friend auto operator<=>(const PatternTerm&, const PatternTerm&) = default;
};

struct TriplePattern {
  PatternTerm s;
  PatternTerm p;
  PatternTerm o;

  /// Distinct variables in s, p, o order.
  std::vector<std::string> variables() const;

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct BgpQuery {
  std::vector<std::string> projection;  // empty: boolean (ASK-like) query
  std::vector<TriplePattern> patterns;

  /// Distinct variables in order of first appearance.
  std::vector<std::string> variables() const;
  bool has_variable_predicate() const;
};

/// `SELECT <vars|*> WHERE { s p o [.] ... }`. Rejects disconnected patterns.
BgpQuery parse_query(std::string_view text);

/// Splits a query file on lines consisting of `---` and parses each block.
std::vector<BgpQuery> parse_query_file(std::string_view text);

std::string to_string(const BgpQuery& q);

/// Checks that the patterns with variables are connected through shared
/// variables. Variable-free patterns are ignored (they act as filters).
bool variables_connected(const std::vector<TriplePattern>& patterns);

// ---------------------------------------------------------------------------
// Query graph

enum class Direction : std::uint8_t {
  Forward,   // tree parent is the subject of the pattern
  Backward,  // tree parent is the object of the pattern
};

struct QueryEdge {
  std::size_t subject = 0;  // vertex index
  std::size_t object = 0;   // vertex index
  PatternTerm predicate;
  std::size_t pattern = 0;  // index into BgpQuery::patterns
};

/// Undirected view of a BGP: subjects and objects are vertices (constants
/// included), every pattern is one edge. Direction is kept as a label.
struct QueryGraph {
  std::vector<PatternTerm> vertices;
  std::vector<QueryEdge> edges;
  std::vector<double> scores;  // per vertex, filled by score_vertices

  std::size_t vertex_index(const PatternTerm& t) const;
  /// Edge indices incident to v (a self loop is listed once).
  std::vector<std::size_t> incident(std::size_t v) const;
  bool connected() const;
};

QueryGraph to_query_graph(const BgpQuery& q);

// ---------------------------------------------------------------------------
// Templates

/// The structural key of a query after lifting every subject/object constant
/// to a variable. Equal keys iff the lifted queries are isomorphic with
/// predicates fixed.
struct TemplateInfo {
  std::string key;
  /// Canonical template pattern over variables ?v0..?v{k-1}.
  std::vector<TriplePattern> patterns;
  /// values[i]: the term of the original query bound to template vertex ?v{i}.
  std::vector<PatternTerm> values;
};

/// Canonical encoding of a query's patterns (constants kept verbatim,
/// variables renumbered). Independent of pattern order and variable names.
std::string canonical_form(const std::vector<TriplePattern>& patterns);

/// Throws UnsupportedQuery when a predicate is a variable.
TemplateInfo derive_template(const BgpQuery& q);

}  // namespace phd
