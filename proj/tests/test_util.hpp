#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "phd/master.hpp"
#include "phd/rdf.hpp"
#include "phd/sparql.hpp"

namespace phd::testing {

inline std::string data_path(const std::string& name) { return std::string(PHD_DATA_DIR) + "/" + name; }

inline std::vector<LexTriple> academic() { return read_triple_file(data_path("academic.nt")); }

inline LexTriple T(std::string s, std::string p, std::string o) { return {std::move(s), std::move(p), std::move(o)}; }

/// Brute-force BGP evaluation by backtracking over patterns, written without
/// any of the library's indexes or join code. Triples are only bucketed by
/// predicate so constant-predicate patterns scan their own bucket.
inline ResultSet oracle(const std::vector<LexTriple>& data, const BgpQuery& q) {
  std::set<LexTriple> unique(data.begin(), data.end());
  std::vector<LexTriple> triples(unique.begin(), unique.end());
  std::map<std::string, std::vector<LexTriple>> by_predicate;
  for (const auto& t : triples) by_predicate[t.p].push_back(t);
  static const std::vector<LexTriple> kNone;
  std::set<std::vector<std::string>> rows;
  std::map<std::string, std::string> binding;

  auto match = [&](const PatternTerm& pt, const std::string& value, std::vector<std::string>& bound) {
    if (!pt.variable) return pt.text == value;
    auto it = binding.find(pt.text);
    if (it != binding.end()) return it->second == value;
    binding[pt.text] = value;
    bound.push_back(pt.text);
    return true;
  };

  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == q.patterns.size()) {
      std::vector<std::string> row;
      for (const auto& v : q.projection) row.push_back(binding.at(v));
      rows.insert(row);
      return;
    }
    const auto& tp = q.patterns[i];
    const auto bucket = by_predicate.find(tp.p.text);
    const auto& scan = tp.p.variable ? triples : bucket == by_predicate.end() ? kNone : bucket->second;
    for (const auto& t : scan) {
      std::vector<std::string> bound;
      if (match(tp.s, t.s, bound) && match(tp.p, t.p, bound) && match(tp.o, t.o, bound)) self(self, i + 1);
      for (const auto& b : bound) binding.erase(b);
    }
  };
  rec(rec, 0);
  return ResultSet{q.projection, {rows.begin(), rows.end()}};
}

/// Random graph over vertices v0.. and predicates p0.. (no "type").
inline std::vector<LexTriple> random_graph(std::mt19937_64& rng, std::size_t triples, std::size_t predicates,
                                           std::size_t vertices) {
  std::uniform_int_distribution<std::size_t> pv(0, vertices - 1), pp(0, predicates - 1);
  std::set<LexTriple> out;
  while (out.size() < triples) {
    out.insert(T("v" + std::to_string(pv(rng)), "p" + std::to_string(pp(rng)), "v" + std::to_string(pv(rng))));
  }
  std::vector<LexTriple> v(out.begin(), out.end());
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

/// Connected query grown from a random walk over the data, so it usually has
/// answers. Each vertex becomes a variable with probability `var_prob`.
inline BgpQuery random_query(std::mt19937_64& rng, const std::vector<LexTriple>& data, std::size_t patterns,
                             double var_prob = 0.8) {
  std::map<std::string, std::vector<std::size_t>> adj;
  for (std::size_t i = 0; i < data.size(); ++i) {
    adj[data[i].s].push_back(i);
    adj[data[i].o].push_back(i);
  }
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<std::size_t> chosen{pick(rng)};
  std::vector<std::string> verts{data[chosen[0]].s, data[chosen[0]].o};
  for (int guard = 0; chosen.size() < patterns && guard < 1000; ++guard) {
    const auto& v = verts[std::uniform_int_distribution<std::size_t>(0, verts.size() - 1)(rng)];
    const auto& cand = adj[v];
    const auto t = cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)];
    if (std::find(chosen.begin(), chosen.end(), t) != chosen.end()) continue;
    chosen.push_back(t);
    for (const auto* x : {&data[t].s, &data[t].o}) {
      if (std::find(verts.begin(), verts.end(), *x) == verts.end()) verts.push_back(*x);
    }
  }
  std::bernoulli_distribution lift(var_prob);
  std::map<std::string, PatternTerm> term;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    term[verts[i]] = lift(rng) ? PatternTerm::var("?x" + std::to_string(i)) : PatternTerm::constant(verts[i]);
  }
  BgpQuery q;
  auto build = [&] {
    q.patterns.clear();
    for (auto t : chosen) {
      q.patterns.push_back(TriplePattern{term[data[t].s], PatternTerm::constant(data[t].p), term[data[t].o]});
    }
  };
  build();
  if (q.variables().empty() || !variables_connected(q.patterns)) {
    for (std::size_t i = 0; i < verts.size(); ++i) term[verts[i]] = PatternTerm::var("?x" + std::to_string(i));
    build();
  }
  auto vars = q.variables();
  std::shuffle(vars.begin(), vars.end(), rng);
  vars.resize(std::uniform_int_distribution<std::size_t>(1, vars.size())(rng));
  std::sort(vars.begin(), vars.end());
  q.projection = vars;
  return q;
}

/// Union of every worker's main index.
inline std::vector<LexTriple> all_main(const std::vector<WorkerDump>& dumps) {
  std::set<LexTriple> s;
  for (const auto& d : dumps) s.insert(d.main.begin(), d.main.end());
  return {s.begin(), s.end()};
}

/// Replica contents keyed by (worker, edge structure) so two clusters with
/// different edge ids can be compared.
inline std::map<std::pair<std::size_t, std::string>, std::set<LexTriple>> replica_contents(
    const std::vector<WorkerDump>& dumps) {
  std::map<std::pair<std::size_t, std::string>, std::set<LexTriple>> out;
  for (std::size_t w = 0; w < dumps.size(); ++w) {
    std::map<EdgeId, std::string> path;
    for (const auto& e : dumps[w].edges) {
      if (!e.active) continue;
      const std::string key = (e.parent == kNoEdge ? "[" + e.root_label + "]" : path.at(e.parent)) + "/" +
                              e.predicate + (e.direction == Direction::Forward ? ">" : "<") + e.child_label;
      path[e.id] = key;
      const auto& ts = dumps[w].modules.at(e.id);
      out[{w, key}] = std::set<LexTriple>(ts.begin(), ts.end());
    }
  }
  return out;
}

}  // namespace phd::testing

#include "phd/cluster.hpp"

namespace phd::testing {

inline ClusterOptions options(std::size_t workers, const std::string& pins = "", bool adaptive = false) {
  ClusterOptions o;
  o.workers = workers;
  o.placement = Placement(workers);
  if (!pins.empty()) o.placement.load_pins(pins);
  o.master.adaptive = adaptive;
  o.master.timeout = Millis(20000);
  return o;
}

/// Redistribution tree of `q` rooted at a chosen vertex, scored with `stats`.
inline RedistTree tree_rooted_at(const BgpQuery& q, const GlobalStats& stats, const std::string& root) {
  auto g = to_query_graph(q);
  score_vertices(g, stats);
  auto t = build_redistribution_tree(g, g.vertex_index(root.starts_with("?") ? PatternTerm::var(root)
                                                                              : PatternTerm::constant(root)));
  t.patterns = q.patterns;
  return t;
}

/// Contents of the active module with this predicate and child label on one worker.
inline std::set<LexTriple> module_of(const WorkerDump& d, const std::string& predicate, const std::string& child) {
  std::set<LexTriple> out;
  bool found = false;
  for (const auto& e : d.edges) {
    if (e.active && e.predicate == predicate && e.child_label == child) {
      const auto& ts = d.modules.at(e.id);
      out.insert(ts.begin(), ts.end());
      found = true;
    }
  }
  if (!found) throw std::runtime_error("no module " + predicate + " -> " + child);
  return out;
}

inline std::uint64_t remote_bytes(const Metrics& m) { return m.traffic.remote.total_bytes(); }

}  // namespace phd::testing
