#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "phd/sparql.hpp"
#include "phd/storage.hpp"

namespace phd {

inline constexpr double kFiltered = -std::numeric_limits<double>::infinity();

/// Subject and object score of one predicate: the average degree of the
/// distinct subjects (objects) the predicate appears with.
struct PredicateStats {
  std::string predicate;
  double subject_score = 0.0;
  double object_score = 0.0;

  friend bool operator==(const PredicateStats&, const PredicateStats&) = default;
};

struct ScorePair {
  double subject = 0.0;
  double object = 0.0;
};

struct GlobalStats {
  std::map<std::string, ScorePair> raw;
  std::map<std::string, ScorePair> effective;
  double mean_subject = 0.0;
  double stddev_subject = 0.0;
  double mean_object = 0.0;
  double stddev_object = 0.0;

  /// Effective scores; a predicate without data scores 0.
  double subject_score(const std::string& predicate) const;
  double object_score(const std::string& predicate) const;
};

/// One pass over a worker's main index. Sorted by predicate lexical.
std::vector<PredicateStats> compute_local_stats(const WorkerStore& store);

/// Unweighted mean per predicate over the workers that reported it. The
/// effective map is left equal to raw; see effective_scores.
GlobalStats aggregate_global(const std::vector<std::vector<PredicateStats>>& locals);

/// Filters the type predicate and scores more than three population standard
/// deviations above the mean (strict) to -inf. Always derived from `raw`, so
/// applying it twice is the same as applying it once.
GlobalStats effective_scores(const GlobalStats& stats, const std::string& type_predicate = "type");

/// max over {pS(p) : p outgoing} U {pO(p) : p incoming}.
double vertex_score(const QueryGraph& g, std::size_t v, const GlobalStats& stats);

/// Fills g.scores for every vertex.
void score_vertices(QueryGraph& g, const GlobalStats& stats);

}  // namespace phd
