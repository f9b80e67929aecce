#include "phd/replica.hpp"

namespace phd {

const std::string& parent_label(const IndexStructure& idx, const IndexEdge& e) {
  if (e.parent == kNoEdge) return e.root_label;
  const auto* p = idx.find(e.parent);
  if (!p) throw LookupError("index edge " + std::to_string(e.id) + " has a missing parent");
  return p->child_label;
}

namespace {

bool covers(const std::string& label, const std::string& term) { return label == kWildcard || label == term; }

}  // namespace

bool edge_accepts(const IndexStructure& idx, const IndexEdge& e, const LexTriple& t) {
  return t.p == e.predicate && covers(parent_label(idx, e), parent_side(t, e.direction)) &&
         covers(e.child_label, child_side(t, e.direction));
}

std::vector<Triple> edge_matches(const StorageModule& m, const Dictionary& dict, const IndexStructure& idx,
                                 const IndexEdge& e, std::optional<TermId> parent_value) {
  std::vector<Triple> out;
  TermId p = 0;
  if (!dict.find(e.predicate, p)) return out;
  const auto& plabel = parent_label(idx, e);
  std::optional<TermId> parent, child;
  if (plabel != kWildcard) {
    TermId id = 0;
    if (!dict.find(plabel, id)) return out;
    if (parent_value && *parent_value != id) return out;
    parent = id;
  } else if (parent_value) {
    parent = parent_value;
  }
  if (e.child_label != kWildcard) {
    TermId id = 0;
    if (!dict.find(e.child_label, id)) return out;
    child = id;
  }
  const bool fwd = e.direction == Direction::Forward;
  std::span<const StorageModule::PairRef> refs;
  if (parent) {
    refs = fwd ? m.by_predicate_subject(p, *parent) : m.by_predicate_object(p, *parent);
  } else if (child) {
    refs = fwd ? m.by_predicate_object(p, *child) : m.by_predicate_subject(p, *child);
  } else {
    refs = m.by_predicate(p);
  }
  for (auto r : refs) {
    const auto& pr = m.pair(r);
    Triple t{pr.s, p, pr.o};
    if (child && child_side(t, e.direction) != *child) continue;
    out.push_back(t);
  }
  return out;
}

bool has_child_value(const StorageModule& m, const IndexEdge& e, TermId predicate, TermId value) {
  return e.direction == Direction::Forward ? !m.by_predicate_object(predicate, value).empty()
                                           : !m.by_predicate_subject(predicate, value).empty();
}

std::size_t ReplicaIndex::triple_count() const {
  std::size_t n = 0;
  for (const auto& [id, m] : modules) {
    const auto* e = structure.find(id);
    if (e && e->active) n += m.size();
  }
  return n;
}

const StorageModule* ReplicaIndex::find_module(EdgeId id) const {
  auto it = modules.find(id);
  return it == modules.end() ? nullptr : &it->second;
}

std::set<TermId> ReplicaIndex::child_values(EdgeId id) const {
  std::set<TermId> out;
  const auto* m = find_module(id);
  const auto* e = structure.find(id);
  if (!m || !e) return out;
  for (auto p : m->predicates()) {
    for (auto r : m->by_predicate(p)) {
      const auto& pr = m->pair(r);
      out.insert(e->direction == Direction::Forward ? pr.o : pr.s);
    }
  }
  return out;
}

}  // namespace phd
