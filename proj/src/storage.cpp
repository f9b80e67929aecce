#include "phd/storage.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include "phd/join_kernels.hpp"

namespace phd {

// ---------------------------------------------------------------------------
// StorageModule

bool StorageModule::insert(const Triple& t) {
  auto& b = blocks_[t.p];
  const auto k = key(t.s, t.o);
  if (b.position.contains(k)) return false;
  PairRef ref;
  if (!free_.empty()) {
    ref = free_.back();
    free_.pop_back();
    pool_[ref] = Pair{t.s, t.o};
  } else {
    ref = static_cast<PairRef>(pool_.size());
    pool_.push_back(Pair{t.s, t.o});
  }
  b.position.emplace(k, static_cast<std::uint32_t>(b.all.size()));
  b.all.push_back(ref);
  b.by_subject[t.s].push_back(ref);
  b.by_object[t.o].push_back(ref);
  ++live_;
  return true;
}

bool StorageModule::erase(const Triple& t) {
  auto bit = blocks_.find(t.p);
  if (bit == blocks_.end()) return false;
  auto& b = bit->second;
  auto pit = b.position.find(key(t.s, t.o));
  if (pit == b.position.end()) return false;
  const auto pos = pit->second;
  const PairRef ref = b.all[pos];
  // Swap-remove from the predicate list, fixing the moved pair's position.
  const PairRef moved = b.all.back();
  b.all[pos] = moved;
  b.all.pop_back();
  if (moved != ref) b.position[key(pool_[moved].s, pool_[moved].o)] = pos;
  b.position.erase(pit);

  auto drop = [ref](std::unordered_map<TermId, std::vector<PairRef>>& m, TermId k) {
    auto it = m.find(k);
    auto& v = it->second;
    v.erase(std::find(v.begin(), v.end(), ref));
    if (v.empty()) m.erase(it);
  };
  drop(b.by_subject, t.s);
  drop(b.by_object, t.o);
  if (b.all.empty()) blocks_.erase(bit);
  free_.push_back(ref);
  --live_;
  return true;
}

bool StorageModule::contains(const Triple& t) const {
  auto bit = blocks_.find(t.p);
  return bit != blocks_.end() && bit->second.position.contains(key(t.s, t.o));
}

void StorageModule::clear() {
  pool_.clear();
  free_.clear();
  blocks_.clear();
  live_ = 0;
}

std::vector<TermId> StorageModule::predicates() const {
  std::vector<TermId> out;
  out.reserve(blocks_.size());
  for (const auto& [p, _] : blocks_) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

std::span<const StorageModule::PairRef> StorageModule::by_predicate(TermId p) const {
  auto it = blocks_.find(p);
  if (it == blocks_.end()) return {};
  return it->second.all;
}

std::span<const StorageModule::PairRef> StorageModule::by_predicate_subject(TermId p, TermId s) const {
  auto it = blocks_.find(p);
  if (it == blocks_.end()) return {};
  auto jt = it->second.by_subject.find(s);
  if (jt == it->second.by_subject.end()) return {};
  return jt->second;
}

std::span<const StorageModule::PairRef> StorageModule::by_predicate_object(TermId p, TermId o) const {
  auto it = blocks_.find(p);
  if (it == blocks_.end()) return {};
  auto jt = it->second.by_object.find(o);
  if (jt == it->second.by_object.end()) return {};
  return jt->second;
}

std::vector<Triple> StorageModule::triples() const {
  std::vector<Triple> out;
  out.reserve(live_);
  for (const auto& [p, b] : blocks_) {
    for (auto r : b.all) out.push_back(Triple{pool_[r].s, p, pool_[r].o});
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool StorageModule::consistent() const {
  std::size_t total = 0;
  for (const auto& [p, b] : blocks_) {
    std::multiset<PairRef> all(b.all.begin(), b.all.end()), subj, obj;
    for (const auto& [s, refs] : b.by_subject) {
      for (auto r : refs) {
        if (pool_[r].s != s) return false;
        subj.insert(r);
      }
    }
    for (const auto& [o, refs] : b.by_object) {
      for (auto r : refs) {
        if (pool_[r].o != o) return false;
        obj.insert(r);
      }
    }
    if (all != subj || all != obj || b.position.size() != b.all.size()) return false;
    total += b.all.size();
  }
  return total == live_;
}

// ---------------------------------------------------------------------------
// BindingTable

void BindingTable::add_row(std::span<const TermId> r) {
  cells_.insert(cells_.end(), r.begin(), r.end());
  ++rows_;
}

void BindingTable::append(const BindingTable& other) {
  if (other.header_ != header_) throw std::logic_error("append: header mismatch");
  cells_.insert(cells_.end(), other.cells_.begin(), other.cells_.end());
  rows_ += other.rows_;
}

int BindingTable::column(const std::string& var) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == var) return static_cast<int>(i);
  }
  return -1;
}

void BindingTable::dedup() {
  if (rows_ <= 1) return;
  const auto n = arity();
  if (n == 0) {
    rows_ = 1;
    return;
  }
  std::vector<std::size_t> order(rows_);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(cells_.begin() + a * n, cells_.begin() + (a + 1) * n,
                                        cells_.begin() + b * n, cells_.begin() + (b + 1) * n);
  };
  auto equal = [&](std::size_t a, std::size_t b) {
    return std::equal(cells_.begin() + a * n, cells_.begin() + (a + 1) * n, cells_.begin() + b * n);
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<TermId> cells;
  cells.reserve(cells_.size());
  std::size_t rows = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && equal(order[i], order[i - 1])) continue;
    cells.insert(cells.end(), cells_.begin() + order[i] * n, cells_.begin() + (order[i] + 1) * n);
    ++rows;
  }
  cells_ = std::move(cells);
  rows_ = rows;
}

std::vector<std::string> shared_variables(const BindingTable& a, const BindingTable& b) {
  std::vector<std::string> out;
  for (const auto& v : a.header()) {
    if (b.column(v) >= 0) out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subquery answering

namespace {

struct Resolved {
  bool possible = true;  // false when a constant is unknown to the dictionary
  TermId s = 0, p = 0, o = 0;
};

Resolved resolve_constants(const Dictionary& dict, const TriplePattern& tp) {
  Resolved r;
  if (!tp.s.variable && !dict.find(tp.s.text, r.s)) r.possible = false;
  if (!tp.p.variable && !dict.find(tp.p.text, r.p)) r.possible = false;
  if (!tp.o.variable && !dict.find(tp.o.text, r.o)) r.possible = false;
  return r;
}

// Emits the bindings of one <s,p,o> candidate into `out` if it satisfies
// repeated-variable constraints.
class RowEmitter {
 public:
  explicit RowEmitter(const TriplePattern& tp) : tp_(tp) {
    header_ = tp.variables();
    slot_s_ = tp.s.variable ? index_of(tp.s.text) : -1;
    slot_p_ = tp.p.variable ? index_of(tp.p.text) : -1;
    slot_o_ = tp.o.variable ? index_of(tp.o.text) : -1;
    row_.resize(header_.size());
  }

  const std::vector<std::string>& header() const { return header_; }

  void emit(TermId s, TermId p, TermId o, BindingTable& out) {
    std::vector<bool> set(row_.size(), false);
    auto put = [&](int slot, TermId v) {
      if (slot < 0) return true;
      if (set[slot]) return row_[slot] == v;
      set[slot] = true;
      row_[slot] = v;
      return true;
    };
    if (put(slot_s_, s) && put(slot_p_, p) && put(slot_o_, o)) out.add_row(row_);
  }

 private:
  int index_of(const std::string& v) const {
    return static_cast<int>(std::find(header_.begin(), header_.end(), v) - header_.begin());
  }

  const TriplePattern& tp_;
  std::vector<std::string> header_;
  int slot_s_, slot_p_, slot_o_;
  std::vector<TermId> row_;
};

void scan_block(const StorageModule& m, TermId p, const TriplePattern& tp, const Resolved& r, RowEmitter& em,
                BindingTable& out) {
  std::span<const StorageModule::PairRef> refs;
  if (!tp.s.variable) {
    refs = m.by_predicate_subject(p, r.s);
  } else if (!tp.o.variable) {
    refs = m.by_predicate_object(p, r.o);
  } else {
    refs = m.by_predicate(p);
  }
  for (auto ref : refs) {
    const auto& pr = m.pair(ref);
    if (!tp.s.variable && pr.s != r.s) continue;
    if (!tp.o.variable && pr.o != r.o) continue;
    em.emit(pr.s, p, pr.o, out);
  }
}

}  // namespace

BindingTable answer_subquery(const StorageModule& module, const Dictionary& dict, const TriplePattern& tp) {
  if (tp.p.variable) throw UnsupportedQuery("answer_subquery needs a constant predicate");
  return scan_subquery(module, dict, tp);
}

BindingTable scan_subquery(const StorageModule& module, const Dictionary& dict, const TriplePattern& tp) {
  RowEmitter em(tp);
  BindingTable out(em.header());
  const auto r = resolve_constants(dict, tp);
  if (!r.possible) return out;
  if (!tp.p.variable) {
    scan_block(module, r.p, tp, r, em, out);
  } else {
    for (auto p : module.predicates()) scan_block(module, p, tp, r, em, out);
  }
  out.dedup();
  return out;
}

std::size_t count_matches(const StorageModule& module, const Dictionary& dict, const TriplePattern& tp) {
  const auto r = resolve_constants(dict, tp);
  if (!r.possible) return 0;
  const bool repeated = (tp.s.variable && tp.o.variable && tp.s.text == tp.o.text) ||
                        (tp.p.variable && (tp.p.text == tp.s.text || tp.p.text == tp.o.text));
  const bool both_const = !tp.s.variable && !tp.o.variable;
  if (repeated || both_const) return scan_subquery(module, dict, tp).size();
  auto count_block = [&](TermId p) -> std::size_t {
    if (!tp.s.variable) return module.by_predicate_subject(p, r.s).size();
    if (!tp.o.variable) return module.by_predicate_object(p, r.o).size();
    return module.by_predicate(p).size();
  };
  if (!tp.p.variable) return count_block(r.p);
  std::size_t n = 0;
  for (auto p : module.predicates()) n += count_block(p);
  return n;
}

// ---------------------------------------------------------------------------
// Joins

BindingTable local_hash_join(const BindingTable& left, const BindingTable& right,
                             const std::vector<std::string>& on) {
  if (on.empty()) throw UnsupportedQuery("join without shared variables (cartesian product)");
  for (const auto& v : on) {
    if (left.column(v) < 0 || right.column(v) < 0) {
      throw std::invalid_argument("join variable " + v + " is not in both headers");
    }
  }
  auto out = kernels::hash_join(left, right, kernels::Exec::Parallel);
  out.dedup();
  return out;
}

BindingTable semi_join(const BindingTable& table, const BindingTable& projection) {
  auto out = kernels::semi_join(table, projection, kernels::Exec::Parallel);
  out.dedup();
  return out;
}

BindingTable project(const BindingTable& table, const std::vector<std::string>& vars) {
  std::vector<int> cols;
  for (const auto& v : vars) {
    const int c = table.column(v);
    if (c < 0) throw std::invalid_argument("projection variable " + v + " is not in the header");
    cols.push_back(c);
  }
  BindingTable out(vars);
  out.reserve(table.size());
  std::vector<TermId> row(cols.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto src = table.row(r);
    for (std::size_t i = 0; i < cols.size(); ++i) row[i] = src[cols[i]];
    out.add_row(row);
  }
  out.dedup();
  return out;
}

BindingTable join_all(std::vector<BindingTable> tables) {
  // Boolean tables first: an empty one empties the whole result.
  std::vector<BindingTable> rest;
  bool any_false = false;
  for (auto& t : tables) {
    if (t.arity() == 0) {
      any_false = any_false || t.empty();
    } else {
      rest.push_back(std::move(t));
    }
  }
  if (rest.empty()) {
    BindingTable out;
    if (!any_false && !tables.empty()) out.add_row({});
    return out;
  }
  BindingTable acc = std::move(rest.front());
  rest.erase(rest.begin());
  while (!rest.empty()) {
    auto it = std::find_if(rest.begin(), rest.end(),
                           [&](const BindingTable& t) { return !shared_variables(acc, t).empty(); });
    if (it == rest.end()) throw UnsupportedQuery("tables share no variables (cartesian product)");
    acc = local_hash_join(acc, *it, shared_variables(acc, *it));
    rest.erase(it);
  }
  if (any_false) return BindingTable(acc.header());
  return acc;
}

// ---------------------------------------------------------------------------
// WorkerStore

bool WorkerStore::insert_triple(const Triple& t) {
  if (!main_.insert(t)) return false;
  ++degree_[t.s];
  ++degree_[t.o];
  return true;
}

bool WorkerStore::delete_triple(const Triple& t) {
  if (!main_.erase(t)) return false;
  for (auto v : {t.s, t.o}) {
    auto it = degree_.find(v);
    if (--it->second == 0) degree_.erase(it);
  }
  return true;
}

bool WorkerStore::delete_triple(const LexTriple& t) {
  TermId s, p, o;
  if (!dict_.find(t.s, s) || !dict_.find(t.p, p) || !dict_.find(t.o, o)) return false;
  return delete_triple(Triple{s, p, o});
}

std::uint32_t WorkerStore::degree(TermId v) const {
  auto it = degree_.find(v);
  return it == degree_.end() ? 0 : it->second;
}

}  // namespace phd
