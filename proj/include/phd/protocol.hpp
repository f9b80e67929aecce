#pragma once

#include <vector>

#include "phd/planner.hpp"
#include "phd/wire.hpp"

namespace phd {

// Payload codecs shared by master and worker.

void write_pattern(Writer& w, const TriplePattern& tp);
TriplePattern read_pattern(Reader& r);
void write_patterns(Writer& w, const std::vector<TriplePattern>& v);
std::vector<TriplePattern> read_patterns(Reader& r);

void write_edge(Writer& w, const IndexEdge& e);
IndexEdge read_edge(Reader& r);

void write_ids(Writer& w, const std::vector<EdgeId>& ids);
std::vector<EdgeId> read_ids(Reader& r);

/// Per-edge string lists, used for projections of child values.
using EdgeValues = std::vector<std::pair<EdgeId, std::vector<std::string>>>;
void write_edge_values(Writer& w, const EdgeValues& v);
EdgeValues read_edge_values(Reader& r);

/// Per-edge triple lists.
using EdgeTriples = std::vector<std::pair<EdgeId, std::vector<LexTriple>>>;
void write_edge_triples(Writer& w, const EdgeTriples& v);
EdgeTriples read_edge_triples(Reader& r);

enum class UpdateKind : std::uint8_t { Delete = 0, Insert = 1 };
enum class QueryMode : std::uint8_t { SemiJoin = 0, Parallel = 1 };

}  // namespace phd
