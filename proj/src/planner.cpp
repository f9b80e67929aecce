#include "phd/planner.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace phd {

std::vector<std::size_t> RedistTree::children(int parent) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].parent == parent) out.push_back(i);
  }
  return out;
}

std::size_t select_core(const QueryGraph& g) {
  if (g.vertices.empty()) throw NoCoreError("empty query graph");
  std::size_t best = 0;
  for (std::size_t v = 1; v < g.vertices.size(); ++v) {
    if (g.scores[v] > g.scores[best] ||
        (g.scores[v] == g.scores[best] && g.vertices[v].text < g.vertices[best].text)) {
      best = v;
    }
  }
  if (g.scores[best] == kFiltered) throw NoCoreError("every query vertex is filtered; no core vertex");
  return best;
}

RedistTree build_redistribution_tree(const QueryGraph& g, std::size_t core) {
  if (core >= g.vertices.size()) throw std::invalid_argument("core vertex out of range");
  if (!g.connected()) throw UnsupportedQuery("query graph is not connected");

  RedistTree tree;
  tree.vertices = g.vertices;
  tree.root = core;

  struct Pending {
    std::size_t edge;
    int parent;
    std::size_t parent_vertex;
    std::size_t child_vertex;
    std::size_t seq;
  };
  std::vector<Pending> pending;
  std::vector<bool> explored(g.edges.size(), false);
  std::size_t seq = 0;

  auto push_incident = [&](std::size_t vertex, int parent) {
    for (auto e : g.incident(vertex)) {
      if (explored[e]) continue;
      explored[e] = true;
      const auto& ge = g.edges[e];
      const std::size_t other = ge.subject == vertex ? ge.object : ge.subject;
      pending.push_back(Pending{e, parent, vertex, other, seq++});
    }
  };

  push_incident(core, -1);
  while (!pending.empty()) {
    auto best = pending.begin();
    for (auto it = pending.begin() + 1; it != pending.end(); ++it) {
      const double sa = g.scores[it->child_vertex], sb = g.scores[best->child_vertex];
      const auto& pa = g.edges[it->edge].predicate.text;
      const auto& pb = g.edges[best->edge].predicate.text;
      if (sa > sb || (sa == sb && (pa < pb || (pa == pb && it->seq < best->seq)))) best = it;
    }
    const Pending p = *best;
    pending.erase(best);

    const auto& ge = g.edges[p.edge];
    TreeEdge te;
    te.pattern = ge.pattern;
    te.parent = p.parent;
    te.parent_vertex = p.parent_vertex;
    te.child_vertex = p.child_vertex;
    te.direction = ge.subject == p.parent_vertex ? Direction::Forward : Direction::Backward;
    te.predicate = ge.predicate.text;
    te.level = p.parent < 0 ? 1 : tree.edges[static_cast<std::size_t>(p.parent)].level + 1;
    tree.levels = std::max(tree.levels, te.level);
    tree.edges.push_back(te);
    push_incident(p.child_vertex, static_cast<int>(tree.edges.size() - 1));
  }
  return tree;
}

RedistTree plan_tree(const BgpQuery& q, const GlobalStats& stats) {
  auto g = to_query_graph(q);
  score_vertices(g, stats);
  auto tree = build_redistribution_tree(g, select_core(g));
  tree.patterns = q.patterns;
  return tree;
}

// ---------------------------------------------------------------------------

std::string index_label(const PatternTerm& t) { return t.variable ? std::string(kWildcard) : t.text; }

bool label_covers(const std::string& label, const PatternTerm& term) {
  return label == kWildcard || (!term.variable && term.text == label);
}

const IndexEdge* IndexStructure::find(EdgeId id) const {
  for (const auto& e : edges_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

IndexEdge* IndexStructure::find(EdgeId id) {
  for (auto& e : edges_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::optional<EdgeId> IndexStructure::find_child(EdgeId parent, const std::string& root_label,
                                                 const std::string& predicate, Direction dir,
                                                 const std::string& child_label) const {
  for (const auto& e : edges_) {
    if (e.parent == parent && (parent != kNoEdge || e.root_label == root_label) && e.predicate == predicate &&
        e.direction == dir && e.child_label == child_label) {
      return e.id;
    }
  }
  return std::nullopt;
}

std::vector<EdgeId> IndexStructure::children(EdgeId id) const {
  std::vector<EdgeId> out;
  for (const auto& e : edges_) {
    if (e.parent == id) out.push_back(e.id);
  }
  return out;
}

void IndexStructure::add(IndexEdge e) {
  if (find(e.id)) throw std::logic_error("duplicate index edge id " + std::to_string(e.id));
  next_id_ = std::max(next_id_, e.id + 1);
  auto pos = std::lower_bound(edges_.begin(), edges_.end(), e.id,
                              [](const IndexEdge& a, EdgeId id) { return a.id < id; });
  edges_.insert(pos, std::move(e));
}

void IndexStructure::activate(const std::vector<EdgeId>& ids) {
  for (auto id : ids) {
    if (auto* e = find(id)) e->active = true;
  }
}

void IndexStructure::remove(const std::vector<EdgeId>& ids) {
  std::set<EdgeId> drop(ids.begin(), ids.end());
  std::erase_if(edges_, [&](const IndexEdge& e) { return drop.contains(e.id); });
}

std::size_t IndexStructure::active_size() const {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](auto& e) { return e.active; }));
}

std::vector<IndexEdge> IndexStructure::active_edges() const {
  std::vector<IndexEdge> out;
  for (const auto& e : edges_) {
    if (e.active) out.push_back(e);
  }
  return out;
}

std::optional<Embedding> check_parallel_eligibility(const RedistTree& tree, const IndexStructure& index) {
  if (tree.edges.empty()) return std::nullopt;
  const auto& root = tree.root_term();

  std::vector<std::string> roots;
  for (const auto& e : index.edges()) {
    if (e.active && e.parent == kNoEdge && label_covers(e.root_label, root) &&
        std::find(roots.begin(), roots.end(), e.root_label) == roots.end()) {
      roots.push_back(e.root_label);
    }
  }

  for (const auto& root_label : roots) {
    Embedding emb{root_label, std::vector<EdgeId>(tree.edges.size(), kNoEdge)};
    // Depth-first backtracking over tree edges in extraction order.
    std::function<bool(std::size_t)> assign = [&](std::size_t i) -> bool {
      if (i == tree.edges.size()) return true;
      const auto& te = tree.edges[i];
      const EdgeId parent = te.parent < 0 ? kNoEdge : emb.edge_of[static_cast<std::size_t>(te.parent)];
      for (const auto& ie : index.edges()) {
        if (!ie.active || ie.parent != parent) continue;
        if (parent == kNoEdge && ie.root_label != root_label) continue;
        if (ie.predicate != te.predicate || ie.direction != te.direction) continue;
        if (!label_covers(ie.child_label, tree.child_term(i))) continue;
        emb.edge_of[i] = ie.id;
        if (assign(i + 1)) return true;
      }
      emb.edge_of[i] = kNoEdge;
      return false;
    };
    if (assign(0)) return emb;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

JoinPlan order_joins(const BgpQuery& q, const std::vector<std::size_t>& cardinalities) {
  const auto n = q.patterns.size();
  if (cardinalities.size() != n) throw std::invalid_argument("one cardinality per pattern expected");
  JoinPlan plan;
  if (n == 0) return plan;

  std::vector<bool> used(n, false);
  std::set<std::string> vars;
  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (cardinalities[i] < cardinalities[first]) first = i;
  }
  auto take = [&](std::size_t i, std::vector<std::string> on) {
    used[i] = true;
    plan.order.push_back(i);
    plan.on.push_back(std::move(on));
    for (auto& v : q.patterns[i].variables()) vars.insert(v);
  };
  take(first, {});
  for (std::size_t step = 1; step < n; ++step) {
    std::optional<std::size_t> best;
    std::vector<std::string> best_on;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      std::vector<std::string> on;
      for (auto& v : q.patterns[i].variables()) {
        if (vars.contains(v)) on.push_back(v);
      }
      if (on.empty()) continue;
      if (!best || cardinalities[i] < cardinalities[*best]) {
        best = i;
        best_on = std::move(on);
      }
    }
    if (!best) throw UnsupportedQuery("patterns are not connected through variables");
    take(*best, std::move(best_on));
  }
  return plan;
}

}  // namespace phd
