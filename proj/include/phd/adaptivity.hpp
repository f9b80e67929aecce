#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "phd/sparql.hpp"

namespace phd {

struct AdaptivityConfig {
  std::uint64_t freq_threshold = 3;
  std::uint64_t proactivity_threshold = 10;
  double rho_max = std::numeric_limits<double>::infinity();
};

/// A query shape with every subject/object constant lifted, plus the terms
/// each template vertex has been bound to so far. Variables are counted by
/// name, constants by lexical.
struct QueryTemplate {
  TemplateInfo shape;
  std::uint64_t frequency = 0;
  std::vector<std::map<std::string, std::uint64_t>> values;  // per template vertex
  bool triggered = false;
};

class TemplateRegistry {
 public:
  /// Counts `q` against its template (creating it on first sight). Returns
  /// the template when this query lifted its frequency above the threshold
  /// for the first time, else nullptr. Queries with variable predicates are
  /// only counted in unbounded_queries().
  QueryTemplate* record(const BgpQuery& q, const AdaptivityConfig& cfg);

  const QueryTemplate* find(const std::string& key) const;
  const std::map<std::string, QueryTemplate>& templates() const { return templates_; }
  std::uint64_t unbounded_queries() const { return unbounded_; }

 private:
  std::map<std::string, QueryTemplate> templates_;
  std::uint64_t unbounded_ = 0;
};

/// Pattern to redistribute for a triggered template. A vertex with more
/// unique values than the proactivity threshold stays a variable; otherwise
/// it takes its most frequent value (ties: lexical order). A variable as the
/// most frequent value also stays a variable. Variables keep their most
/// frequent observed name so instances plan to the same tree.
BgpQuery instantiate_template(const QueryTemplate& t, const AdaptivityConfig& cfg);

}  // namespace phd
