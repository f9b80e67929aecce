#include "phd/worker.hpp"

#include <algorithm>

#include "phd/protocol.hpp"
#include "phd/stats.hpp"

namespace phd {

Worker::Worker(NodeId id, std::size_t workers, Endpoint& ep, Placement placement, Millis timeout)
    : id_(id), n_(workers), ep_(ep), placement_(std::move(placement)), timeout_(timeout) {}

void Worker::run() {
  for (;;) {
    auto m = ep_.next_command(Millis(200));
    if (!m) {
      if (ep_.closed()) return;
      continue;
    }
    if (m->tag == Tag::Shutdown) return;
    try {
      handle(*m);
    } catch (const std::exception& e) {
      // Tell everyone taking part in this operation, so nobody waits out
      // the barrier timeout.
      const std::string why = std::string(tag_name(m->tag)) + ": " + e.what();
      try {
        ep_.send(kMasterId, Tag::Fault, m->op, why);
        for (std::size_t w = 0; w < n_; ++w) {
          if (w != id_) ep_.send(static_cast<NodeId>(w), Tag::Fault, m->op, why);
        }
      } catch (const std::exception&) {
      }
    }
  }
}

void Worker::reply(Tag tag, std::string payload) { ep_.send(current_.sender, tag, op_, std::move(payload)); }

void Worker::to_all(Tag tag, const std::string& payload) {
  for (std::size_t w = 0; w < n_; ++w) ep_.send(static_cast<NodeId>(w), tag, op_, payload);
}

std::vector<Message> Worker::gather(Tag tag) {
  auto msgs = ep_.collect(op_, tag, n_, timeout_);
  std::sort(msgs.begin(), msgs.end(), [](const Message& a, const Message& b) { return a.sender < b.sender; });
  return msgs;
}

void Worker::handle(const Message& m) {
  op_ = m.op;
  current_ = Message{m.tag, m.sender, m.op, {}};
  ep_.discard_before(op_);
  if (auto it = faults_.find(static_cast<std::uint8_t>(m.tag)); it != faults_.end() && it->second > 0) {
    --it->second;
    throw std::runtime_error("injected fault");
  }
  Reader r(m.payload);
  switch (m.tag) {
    case Tag::LoadTriples: on_load(r); break;
    case Tag::StatsRequest: on_stats(); break;
    case Tag::CardinalityRequest: on_cardinality(r); break;
    case Tag::QueryBroadcast: on_query(r); break;
    case Tag::SemiJoinStep: on_semijoin_step(r); break;
    case Tag::ResultRequest: on_result_request(); break;
    case Tag::RedistBegin: on_redist_begin(r); break;
    case Tag::RedistLevel: on_redist_level(r); break;
    case Tag::RedistCommit: on_redist_finish(r, true); break;
    case Tag::RedistAbort: on_redist_finish(r, false); break;
    case Tag::UpdateBatch: on_update_batch(r); break;
    case Tag::InsertLevel: on_insert_level(r); break;
    case Tag::MetricsRequest: on_metrics(); break;
    case Tag::DumpRequest: on_dump(); break;
    case Tag::InjectFault: on_inject_fault(r); break;
    default: throw WireError(std::string("unexpected command ") + tag_name(m.tag));
  }
}

// ---------------------------------------------------------------------------

BindingTable Worker::to_table(const LexTable& t, bool intern) {
  BindingTable out(t.header);
  std::vector<TermId> row(t.header.size());
  for (const auto& lex : t.rows) {
    bool known = true;
    for (std::size_t c = 0; c < lex.size() && known; ++c) {
      if (intern) {
        row[c] = store_.dict().intern(lex[c]);
      } else {
        known = store_.dict().find(lex[c], row[c]);
      }
    }
    // A term this worker has never seen cannot match any local triple.
    if (known) out.add_row(row);
  }
  return out;
}

LexTable Worker::to_lex(const BindingTable& t) const {
  LexTable out;
  out.header = t.header();
  out.rows.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<std::string> row;
    for (auto id : t.row(i)) row.push_back(store_.dict().resolve(id));
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<LexTriple> Worker::to_lex(const std::vector<Triple>& ts) const {
  std::vector<LexTriple> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(store_.dict().resolve(t));
  return out;
}

// ---------------------------------------------------------------------------

void Worker::on_load(Reader& r) {
  std::uint64_t inserted = 0;
  for (const auto& t : r.triples()) inserted += store_.insert_triple(t);
  Writer w;
  w.u64(inserted).u64(store_.size());
  reply(Tag::LoadDone, w.take());
}

void Worker::on_stats() {
  const auto stats = compute_local_stats(store_);
  Writer w;
  w.u32(static_cast<std::uint32_t>(stats.size()));
  for (const auto& s : stats) w.str(s.predicate).f64(s.subject_score).f64(s.object_score);
  reply(Tag::StatsReport, w.take());
}

void Worker::on_cardinality(Reader& r) {
  Writer w;
  const auto patterns = read_patterns(r);
  w.u32(static_cast<std::uint32_t>(patterns.size()));
  for (const auto& tp : patterns) w.u64(count_matches(store_.main(), store_.dict(), tp));
  reply(Tag::CardinalityReply, w.take());
}

void Worker::on_query(Reader& r) {
  const auto mode = static_cast<QueryMode>(r.u8());
  const auto patterns = read_patterns(r);
  if (mode == QueryMode::SemiJoin) {
    const auto first = r.u32();
    prefix_ = scan_subquery(store_.main(), store_.dict(), patterns.at(first));
    reply(Tag::Ack, {});
    return;
  }
  // Parallel mode: every pattern is answered from its embedded replica edge.
  const auto edges = read_ids(r);
  if (edges.size() != patterns.size()) throw WireError("one replica edge per pattern expected");
  std::vector<BindingTable> tables;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto* e = replicas_.structure.find(edges[i]);
    const auto* m = replicas_.find_module(edges[i]);
    if (!e || !e->active || !m) {
      throw std::logic_error("replica index has no active edge " + std::to_string(edges[i]));
    }
    tables.push_back(answer_subquery(*m, store_.dict(), patterns[i]));
  }
  Writer w;
  to_lex(join_all(std::move(tables))).write(w);
  reply(Tag::PartialResult, w.take());
}

void Worker::on_semijoin_step(Reader& r) {
  const auto pattern = read_pattern(r);
  const auto on = r.strings();

  // Ship the projection of our prefix on the join columns to every worker.
  Writer pw;
  to_lex(project(prefix_, on)).write(pw);
  to_all(Tag::SubqueryProjection, pw.take());

  // Answer every projection with the local candidates that join with it.
  const auto local = scan_subquery(store_.main(), store_.dict(), pattern);
  for (const auto& m : gather(Tag::SubqueryProjection)) {
    Reader pr(m.payload);
    const auto proj = to_table(LexTable::read(pr), false);
    Writer cw;
    to_lex(semi_join(local, proj)).write(cw);
    ep_.send(m.sender, Tag::CandidateRows, op_, cw.take());
  }

  BindingTable candidates(local.header());
  for (const auto& m : gather(Tag::CandidateRows)) {
    Reader cr(m.payload);
    candidates.append(to_table(LexTable::read(cr), true));
  }
  candidates.dedup();
  prefix_ = local_hash_join(prefix_, candidates, on);
  reply(Tag::Ack, {});
}

void Worker::on_result_request() {
  Writer w;
  to_lex(prefix_).write(w);
  prefix_ = BindingTable();
  reply(Tag::PartialResult, w.take());
}

// ---------------------------------------------------------------------------

void Worker::on_redist_begin(Reader& r) {
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto e = read_edge(r);
    e.active = false;
    replicas_.modules[e.id];
    replicas_.structure.add(std::move(e));
  }
  reply(Tag::Ack, {});
}

void Worker::on_redist_level(Reader& r) {
  const auto level = r.u16();
  const auto ids = read_ids(r);
  const auto& dict = store_.dict();
  const auto& idx = replicas_.structure;
  auto edge = [&](EdgeId id) -> const IndexEdge& {
    const auto* e = idx.find(id);
    if (!e) throw LookupError("unknown index edge " + std::to_string(id));
    return *e;
  };

  std::vector<EdgeTriples> outgoing(n_);
  if (level == 1) {
    // Hash placement on the root-side term.
    for (auto id : ids) {
      const auto& e = edge(id);
      std::vector<std::vector<LexTriple>> per_worker(n_);
      for (const auto& t : edge_matches(store_.main(), dict, idx, e)) {
        const auto& root = dict.resolve(parent_side(t, e.direction));
        per_worker[placement_.worker_of(root)].push_back(dict.resolve(t));
      }
      for (std::size_t w = 0; w < n_; ++w) outgoing[w].emplace_back(id, std::move(per_worker[w]));
    }
  } else {
    // Propagation: ask every worker for triples hanging off our parent values.
    EdgeValues request;
    for (auto id : ids) {
      std::vector<std::string> values;
      for (auto v : replicas_.child_values(edge(id).parent)) values.push_back(dict.resolve(v));
      request.emplace_back(id, std::move(values));
    }
    Writer rw;
    write_edge_values(rw, request);
    to_all(Tag::RedistProjection, rw.take());
    for (const auto& m : gather(Tag::RedistProjection)) {
      Reader pr(m.payload);
      EdgeTriples answer;
      for (auto& [id, values] : read_edge_values(pr)) {
        const auto& e = edge(id);
        std::vector<LexTriple> hits;
        for (const auto& v : values) {
          TermId vid = 0;
          if (!dict.find(v, vid)) continue;
          for (const auto& t : edge_matches(store_.main(), dict, idx, e, vid)) hits.push_back(dict.resolve(t));
        }
        answer.emplace_back(id, std::move(hits));
      }
      outgoing[m.sender] = std::move(answer);
    }
  }
  for (std::size_t w = 0; w < n_; ++w) {
    Writer tw;
    write_edge_triples(tw, outgoing[w]);
    ep_.send(static_cast<NodeId>(w), Tag::RedistTriples, op_, tw.take());
  }

  std::uint64_t received = 0;
  for (const auto& m : gather(Tag::RedistTriples)) {
    Reader tr(m.payload);
    for (auto& [id, triples] : read_edge_triples(tr)) {
      auto& module = replicas_.module(id);
      for (const auto& t : triples) received += module.insert(store_.dict().intern(t));
    }
  }
  Writer w;
  w.u64(received);
  reply(Tag::Ack, w.take());
}

void Worker::on_redist_finish(Reader& r, bool commit) {
  const auto ids = read_ids(r);
  if (commit) {
    replicas_.structure.activate(ids);
  } else {
    replicas_.structure.remove(ids);
    for (auto id : ids) replicas_.modules.erase(id);
  }
  reply(Tag::Ack, {});
}

// ---------------------------------------------------------------------------

void Worker::cascade(EdgeId edge, TermId value) {
  const auto& idx = replicas_.structure;
  for (auto child : idx.children(edge)) {
    const auto* ce = idx.find(child);
    if (!ce || !ce->active) continue;
    auto& module = replicas_.module(child);
    for (const auto& t : edge_matches(module, store_.dict(), idx, *ce, value)) {
      module.erase(t);
      const auto c = child_side(t, ce->direction);
      if (!has_child_value(module, *ce, t.p, c)) cascade(child, c);
    }
  }
}

void Worker::delete_from_replicas(const LexTriple& lt) {
  const auto& idx = replicas_.structure;
  Triple t;
  auto& dict = store_.dict();
  if (!dict.find(lt.s, t.s) || !dict.find(lt.p, t.p) || !dict.find(lt.o, t.o)) return;
  // Depth-first over the forest so parents are handled before children.
  std::vector<EdgeId> stack;
  for (const auto& e : idx.edges()) {
    if (e.parent == kNoEdge) stack.push_back(e.id);
  }
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    const auto* e = idx.find(id);
    if (!e || !e->active) continue;
    auto kids = idx.children(id);
    stack.insert(stack.end(), kids.rbegin(), kids.rend());
    if (!edge_accepts(idx, *e, lt)) continue;
    auto& module = replicas_.module(id);
    if (!module.erase(t)) continue;
    const auto c = child_side(t, e->direction);
    if (!has_child_value(module, *e, t.p, c)) cascade(id, c);
  }
}

void Worker::on_update_batch(Reader& r) {
  const auto kind = static_cast<UpdateKind>(r.u8());
  auto triples = r.triples();
  std::string outcomes(triples.size(), '\0');
  if (kind == UpdateKind::Delete) {
    for (std::size_t i = 0; i < triples.size(); ++i) {
      outcomes[i] = store_.delete_triple(triples[i]) ? 1 : 0;
      delete_from_replicas(triples[i]);
    }
  } else {
    for (std::size_t i = 0; i < triples.size(); ++i) {
      if (r.u16() == id_) outcomes[i] = store_.insert_triple(triples[i]) ? 1 : 0;
    }
    batch_ = std::move(triples);
    new_values_.clear();
  }
  Writer w;
  w.blob(outcomes);
  reply(Tag::Ack, w.take());
}

void Worker::on_insert_level(Reader& r) {
  const int level = r.u16();
  auto& dict = store_.dict();
  const auto& idx = replicas_.structure;
  std::vector<IndexEdge> edges;
  for (const auto& e : idx.edges()) {
    if (e.active && e.level == level) edges.push_back(e);
  }

  // Batch triples that belong on this worker for each edge.
  EdgeTriples adds;
  for (const auto& e : edges) {
    std::vector<LexTriple> hits;
    for (const auto& t : batch_) {
      if (!edge_accepts(idx, e, t)) continue;
      const auto& pv = parent_side(t, e.direction);
      if (level == 1) {
        if (placement_.worker_of(pv) != id_) continue;
      } else {
        const auto* pe = idx.find(e.parent);
        TermId pid = 0, ppred = 0;
        if (!dict.find(pv, pid) || !dict.find(pe->predicate, ppred)) continue;
        if (!has_child_value(replicas_.module(e.parent), *pe, ppred, pid)) continue;
      }
      hits.push_back(t);
    }
    adds.emplace_back(e.id, std::move(hits));
  }

  // Parent values that appeared during this batch pull their subtrees from
  // every worker's main index.
  if (level > 1) {
    EdgeValues request;
    for (const auto& e : edges) {
      const auto& fresh = new_values_[e.parent];
      request.emplace_back(e.id, std::vector<std::string>(fresh.begin(), fresh.end()));
    }
    Writer rw;
    write_edge_values(rw, request);
    to_all(Tag::ValidationRequest, rw.take());
    for (const auto& m : gather(Tag::ValidationRequest)) {
      Reader pr(m.payload);
      EdgeTriples answer;
      for (auto& [id, values] : read_edge_values(pr)) {
        const auto* e = idx.find(id);
        if (!e) throw LookupError("unknown index edge " + std::to_string(id));
        std::vector<LexTriple> hits;
        for (const auto& v : values) {
          TermId vid = 0;
          if (!dict.find(v, vid)) continue;
          for (const auto& t : edge_matches(store_.main(), dict, idx, *e, vid)) hits.push_back(dict.resolve(t));
        }
        answer.emplace_back(id, std::move(hits));
      }
      Writer aw;
      write_edge_triples(aw, answer);
      ep_.send(m.sender, Tag::ValidationRows, op_, aw.take());
    }
    for (const auto& m : gather(Tag::ValidationRows)) {
      Reader ar(m.payload);
      for (auto& entry : read_edge_triples(ar)) adds.push_back(std::move(entry));
    }
  }

  for (const auto& [id, triples] : adds) {
    const auto* e = idx.find(id);
    auto& module = replicas_.module(id);
    for (const auto& lt : triples) {
      const auto t = dict.intern(lt);
      const auto c = child_side(t, e->direction);
      const bool known = has_child_value(module, *e, t.p, c);
      if (module.insert(t) && !known) new_values_[id].insert(dict.resolve(c));
    }
  }
  reply(Tag::Ack, {});
}

// ---------------------------------------------------------------------------

void Worker::on_metrics() {
  Writer w;
  ep_.meter().snapshot().write(w);
  w.u64(store_.size()).u64(replicas_.triple_count());
  reply(Tag::MetricsReply, w.take());
}

void Worker::on_dump() {
  Writer w;
  auto main = to_lex(store_.main().triples());
  std::sort(main.begin(), main.end());
  w.triples(main);
  const auto& edges = replicas_.structure.edges();
  w.u32(static_cast<std::uint32_t>(edges.size()));
  for (const auto& e : edges) {
    write_edge(w, e);
    const auto* m = replicas_.find_module(e.id);
    auto ts = m ? to_lex(m->triples()) : std::vector<LexTriple>{};
    std::sort(ts.begin(), ts.end());
    w.triples(ts);
  }
  reply(Tag::DumpReply, w.take());
}

void Worker::on_inject_fault(Reader& r) {
  const auto tag = r.u8();
  faults_[tag] = r.u32();
  reply(Tag::Ack, {});
}

}  // namespace phd
