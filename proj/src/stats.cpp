#include "phd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace phd {

double GlobalStats::subject_score(const std::string& predicate) const {
  auto it = effective.find(predicate);
  return it == effective.end() ? 0.0 : it->second.subject;
}

double GlobalStats::object_score(const std::string& predicate) const {
  auto it = effective.find(predicate);
  return it == effective.end() ? 0.0 : it->second.object;
}

std::vector<PredicateStats> compute_local_stats(const WorkerStore& store) {
  const auto& main = store.main();
  std::vector<PredicateStats> out;
  for (auto p : main.predicates()) {
    std::unordered_set<TermId> subjects, objects;
    for (auto ref : main.by_predicate(p)) {
      subjects.insert(main.pair(ref).s);
      objects.insert(main.pair(ref).o);
    }
    auto mean_degree = [&](const std::unordered_set<TermId>& vs) {
      double sum = 0.0;
      for (auto v : vs) sum += store.degree(v);
      return sum / static_cast<double>(vs.size());
    };
    out.push_back(PredicateStats{store.dict().resolve(p), mean_degree(subjects), mean_degree(objects)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.predicate < b.predicate; });
  return out;
}

GlobalStats aggregate_global(const std::vector<std::vector<PredicateStats>>& locals) {
  struct Acc {
    double s = 0.0, o = 0.0;
    int n = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& worker : locals) {
    for (const auto& ps : worker) {
      auto& a = acc[ps.predicate];
      a.s += ps.subject_score;
      a.o += ps.object_score;
      ++a.n;
    }
  }
  GlobalStats g;
  for (const auto& [p, a] : acc) g.raw[p] = ScorePair{a.s / a.n, a.o / a.n};
  g.effective = g.raw;
  return g;
}

namespace {

// Population mean and standard deviation; fewer than two values give sigma 0.
std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace

GlobalStats effective_scores(const GlobalStats& stats, const std::string& type_predicate) {
  GlobalStats g;
  g.raw = stats.raw;
  std::vector<double> ss, os;
  for (const auto& [p, sc] : g.raw) {
    ss.push_back(sc.subject);
    os.push_back(sc.object);
  }
  std::tie(g.mean_subject, g.stddev_subject) = mean_stddev(ss);
  std::tie(g.mean_object, g.stddev_object) = mean_stddev(os);
  for (const auto& [p, sc] : g.raw) {
    const bool outlier = p == type_predicate || sc.subject > g.mean_subject + 3.0 * g.stddev_subject ||
                         sc.object > g.mean_object + 3.0 * g.stddev_object;
    g.effective[p] = outlier ? ScorePair{kFiltered, kFiltered} : sc;
  }
  return g;
}

double vertex_score(const QueryGraph& g, std::size_t v, const GlobalStats& stats) {
  double best = kFiltered;
  for (const auto& e : g.edges) {
    if (e.predicate.variable) throw UnsupportedQuery("vertex scores need constant predicates");
    if (e.subject == v) best = std::max(best, stats.subject_score(e.predicate.text));
    if (e.object == v) best = std::max(best, stats.object_score(e.predicate.text));
  }
  return best;
}

void score_vertices(QueryGraph& g, const GlobalStats& stats) {
  g.scores.resize(g.vertices.size());
  for (std::size_t v = 0; v < g.vertices.size(); ++v) g.scores[v] = vertex_score(g, v, stats);
}

}  // namespace phd
