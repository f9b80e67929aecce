#include "phd/master.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <set>
#include <sstream>

namespace phd {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string ResultSet::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "\t" : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "\t" : "") + row[i];
    out += '\n';
  }
  return out;
}

std::vector<UpdateOp> parse_updates(std::string_view text) {
  std::vector<UpdateOp> ops;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') {
      if (nl == std::string_view::npos) break;
      continue;
    }
    const char sign = line[first];
    if (sign != '+' && sign != '-') {
      throw InputError("update line " + std::to_string(line_no) + ": expected '+' or '-' prefix");
    }
    UpdateOp op;
    op.kind = sign == '+' ? UpdateKind::Insert : UpdateKind::Delete;
    if (!parse_triple_line(line.substr(first + 1), op.triple, line_no)) {
      throw InputError("update line " + std::to_string(line_no) + ": missing triple");
    }
    ops.push_back(std::move(op));
    if (nl == std::string_view::npos) break;
  }
  return ops;
}

Master::Master(std::size_t workers, Endpoint& ep, MasterConfig cfg)
    : n_(workers), ep_(ep), cfg_(std::move(cfg)), rng_(cfg_.seed) {
  if (n_ == 0) throw std::invalid_argument("a cluster needs at least one worker");
}

std::vector<Message> Master::round(Tag command, const std::string& payload, Tag reply) {
  return round_each(command, std::vector<std::string>(n_, payload), reply);
}

std::vector<Message> Master::round_each(Tag command, const std::vector<std::string>& payloads, Tag reply) {
  const auto op = ++op_;
  ep_.discard_before(op);
  try {
    for (std::size_t w = 0; w < n_; ++w) ep_.send(static_cast<NodeId>(w), command, op, payloads[w]);
    auto msgs = ep_.collect(op, reply, n_, cfg_.timeout);
    std::sort(msgs.begin(), msgs.end(), [](const Message& a, const Message& b) { return a.sender < b.sender; });
    return msgs;
  } catch (const RemoteFault& e) {
    throw ClusterError(std::string(tag_name(command)) + " failed on " + e.what());
  } catch (const TransportError& e) {
    throw ClusterError(std::string(tag_name(command)) + " failed: " + e.what());
  }
}

// ---------------------------------------------------------------------------

void Master::load(const std::vector<LexTriple>& triples, const std::vector<std::size_t>* assignment) {
  if (assignment && assignment->size() != triples.size()) {
    throw InputError("assignment has " + std::to_string(assignment->size()) + " entries for " +
                     std::to_string(triples.size()) + " triples");
  }
  std::vector<std::vector<LexTriple>> parts(n_);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto w = assignment ? (*assignment)[i] : i % n_;
    if (w >= n_) throw InputError("assignment names worker " + std::to_string(w));
    parts[w].push_back(triples[i]);
  }
  std::vector<std::string> payloads;
  for (const auto& p : parts) {
    Writer w;
    w.triples(p);
    payloads.push_back(w.take());
  }
  round_each(Tag::LoadTriples, payloads, Tag::LoadDone);
  collect_stats();
}

const GlobalStats& Master::collect_stats() {
  std::vector<std::vector<PredicateStats>> locals;
  for (const auto& m : round(Tag::StatsRequest, {}, Tag::StatsReport)) {
    Reader r(m.payload);
    std::vector<PredicateStats> local(r.u32());
    for (auto& s : local) {
      s.predicate = r.str();
      s.subject_score = r.f64();
      s.object_score = r.f64();
    }
    locals.push_back(std::move(local));
  }
  stats_ = effective_scores(aggregate_global(locals), cfg_.type_predicate);
  return stats_;
}

std::vector<std::uint64_t> Master::cardinalities(const std::vector<TriplePattern>& patterns) {
  Writer w;
  write_patterns(w, patterns);
  std::vector<std::uint64_t> total(patterns.size(), 0);
  for (const auto& m : round(Tag::CardinalityRequest, w.take(), Tag::CardinalityReply)) {
    Reader r(m.payload);
    const auto n = r.u32();
    for (std::uint32_t i = 0; i < n && i < total.size(); ++i) total[i] += r.u64();
  }
  return total;
}

// ---------------------------------------------------------------------------

ResultSet Master::finish(const BgpQuery& q, const std::vector<Message>& partials, bool check_disjoint) {
  const auto vars = q.variables();
  std::set<std::vector<std::string>> full;
  for (const auto& m : partials) {
    Reader r(m.payload);
    const auto t = LexTable::read(r);
    if (t.rows.empty()) continue;
    std::vector<std::size_t> col(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
      auto it = std::find(t.header.begin(), t.header.end(), vars[i]);
      if (it == t.header.end()) throw ClusterError("partial result lacks variable " + vars[i]);
      col[i] = static_cast<std::size_t>(it - t.header.begin());
    }
    for (const auto& row : t.rows) {
      std::vector<std::string> canon(vars.size());
      for (std::size_t i = 0; i < vars.size(); ++i) canon[i] = row[col[i]];
      if (!full.insert(std::move(canon)).second && check_disjoint) ++duplicate_rows_;
    }
  }
  assert(duplicate_rows_ == 0 && "parallel partial results overlap");

  ResultSet rs;
  rs.header = q.projection;
  std::vector<std::size_t> proj;
  for (const auto& v : q.projection) {
    proj.push_back(static_cast<std::size_t>(std::find(vars.begin(), vars.end(), v) - vars.begin()));
  }
  std::set<std::vector<std::string>> rows;
  for (const auto& row : full) {
    std::vector<std::string> out;
    for (auto c : proj) out.push_back(row[c]);
    rows.insert(std::move(out));
  }
  rs.rows.assign(rows.begin(), rows.end());
  return rs;
}

ResultSet Master::execute_distributed(const BgpQuery& q) {
  // Variable-free patterns are checked once up front; they only filter.
  const auto cards = cardinalities(q.patterns);
  BgpQuery rest;
  rest.projection = q.projection;
  std::vector<std::uint64_t> rest_cards;
  for (std::size_t i = 0; i < q.patterns.size(); ++i) {
    if (q.patterns[i].variables().empty()) {
      if (cards[i] == 0) return ResultSet{q.projection, {}};
    } else {
      rest.patterns.push_back(q.patterns[i]);
      rest_cards.push_back(cards[i]);
    }
  }
  if (rest.patterns.empty()) return ResultSet{q.projection, {{}}};

  std::vector<std::size_t> est(rest_cards.begin(), rest_cards.end());
  const auto plan = order_joins(rest, est);
  {
    Writer w;
    w.u8(static_cast<std::uint8_t>(QueryMode::SemiJoin));
    write_patterns(w, rest.patterns);
    w.u32(static_cast<std::uint32_t>(plan.order.front()));
    round(Tag::QueryBroadcast, w.take(), Tag::Ack);
  }
  for (std::size_t step = 1; step < plan.order.size(); ++step) {
    Writer w;
    write_pattern(w, rest.patterns[plan.order[step]]);
    w.strings(plan.on[step]);
    round(Tag::SemiJoinStep, w.take(), Tag::Ack);
  }
  return finish(rest, round(Tag::ResultRequest, {}, Tag::PartialResult), false);
}

ResultSet Master::execute_parallel(const BgpQuery& q, const RedistTree& tree, const Embedding& emb) {
  std::vector<EdgeId> per_pattern(q.patterns.size(), kNoEdge);
  for (std::size_t i = 0; i < tree.edges.size(); ++i) per_pattern.at(tree.edges[i].pattern) = emb.edge_of.at(i);
  Writer w;
  w.u8(static_cast<std::uint8_t>(QueryMode::Parallel));
  write_patterns(w, q.patterns);
  write_ids(w, per_pattern);
  return finish(q, round(Tag::QueryBroadcast, w.take(), Tag::PartialResult), true);
}

std::optional<RedistTree> Master::plan(const BgpQuery& q) const {
  if (q.has_variable_predicate()) return std::nullopt;
  try {
    return plan_tree(q, stats_);
  } catch (const NoCoreError&) {
    return std::nullopt;
  }
}

QueryReport Master::run(const BgpQuery& q) {
  const auto t0 = std::chrono::steady_clock::now();
  QueryReport rep;
  auto tree = plan(q);
  std::optional<Embedding> emb;
  if (tree) emb = eligible(*tree);
  if (emb) {
    rep.result = execute_parallel(q, *tree, *emb);
    rep.mode = QueryMode::Parallel;
  } else {
    rep.result = execute_distributed(q);
    rep.mode = QueryMode::SemiJoin;
  }

  if (cfg_.adaptive) {
    if (auto* t = templates_.record(q, cfg_.adaptivity); t && replication_ratio() < cfg_.adaptivity.rho_max) {
      const auto t1 = std::chrono::steady_clock::now();
      if (auto target = plan(instantiate_template(*t, cfg_.adaptivity))) {
        redistribute(*target);
        t->triggered = true;
        rep.triggered = true;
      }
      rep.redistribute_ms = ms_since(t1);
    }
  }
  rep.wall_ms = ms_since(t0);
  return rep;
}

RedistReport Master::redistribute(const RedistTree& tree) {
  RedistReport rep;
  const auto root_label = index_label(tree.root_term());
  std::vector<EdgeId> id_of(tree.edges.size(), kNoEdge);
  std::vector<IndexEdge> fresh;
  for (std::size_t i = 0; i < tree.edges.size(); ++i) {
    const auto& te = tree.edges[i];
    const EdgeId parent = te.parent < 0 ? kNoEdge : id_of[static_cast<std::size_t>(te.parent)];
    const auto child_label = index_label(tree.child_term(i));
    if (auto existing = query_index_.find_child(parent, root_label, te.predicate, te.direction, child_label)) {
      id_of[i] = *existing;
      continue;
    }
    IndexEdge e{query_index_.next_id(), parent, root_label, te.predicate, te.direction, child_label, te.level, false};
    query_index_.add(e);
    fresh.push_back(e);
    id_of[i] = e.id;
    rep.new_edges.push_back(e.id);
  }
  if (fresh.empty()) return rep;

  Writer ids_w;
  write_ids(ids_w, rep.new_edges);
  const auto ids_payload = ids_w.take();
  try {
    Writer w;
    w.u32(static_cast<std::uint32_t>(fresh.size()));
    for (const auto& e : fresh) write_edge(w, e);
    round(Tag::RedistBegin, w.take(), Tag::Ack);
    int max_level = 0;
    for (const auto& e : fresh) max_level = std::max(max_level, e.level);
    for (int level = 1; level <= max_level; ++level) {
      std::vector<EdgeId> ids;
      for (const auto& e : fresh) {
        if (e.level == level) ids.push_back(e.id);
      }
      if (ids.empty()) continue;
      Writer lw;
      lw.u16(static_cast<std::uint16_t>(level));
      write_ids(lw, ids);
      for (const auto& m : round(Tag::RedistLevel, lw.take(), Tag::Ack)) {
        Reader r(m.payload);
        rep.moved += r.u64();
      }
    }
    round(Tag::RedistCommit, ids_payload, Tag::Ack);
    query_index_.activate(rep.new_edges);
  } catch (const ClusterError&) {
    try {
      round(Tag::RedistAbort, ids_payload, Tag::Ack);
    } catch (const ClusterError&) {
      // Workers that miss the abort keep inactive edges, which are never read.
    }
    query_index_.remove(rep.new_edges);
    throw;
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<bool> Master::batch_delete(const std::vector<LexTriple>& triples) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(UpdateKind::Delete)).triples(triples);
  std::vector<bool> out(triples.size(), false);
  for (const auto& m : round(Tag::UpdateBatch, w.take(), Tag::Ack)) {
    Reader r(m.payload);
    const auto flags = r.blob();
    for (std::size_t i = 0; i < out.size() && i < flags.size(); ++i) out[i] = out[i] || flags[i] != 0;
  }
  return out;
}

std::vector<bool> Master::batch_insert(const std::vector<LexTriple>& triples) {
  std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
  std::vector<std::uint16_t> assigned(triples.size());
  for (auto& a : assigned) a = static_cast<std::uint16_t>(pick(rng_));
  Writer w;
  w.u8(static_cast<std::uint8_t>(UpdateKind::Insert)).triples(triples);
  for (auto a : assigned) w.u16(a);
  std::vector<bool> out(triples.size(), false);
  for (const auto& m : round(Tag::UpdateBatch, w.take(), Tag::Ack)) {
    Reader r(m.payload);
    const auto flags = r.blob();
    for (std::size_t i = 0; i < out.size() && i < flags.size(); ++i) {
      if (assigned[i] == m.sender) out[i] = flags[i] != 0;
    }
  }
  int levels = 0;
  for (const auto& e : query_index_.edges()) {
    if (e.active) levels = std::max(levels, e.level);
  }
  for (int level = 1; level <= levels; ++level) {
    Writer lw;
    lw.u16(static_cast<std::uint16_t>(level));
    round(Tag::InsertLevel, lw.take(), Tag::Ack);
  }
  return out;
}

std::vector<bool> Master::apply_updates(const std::vector<UpdateOp>& ops) {
  std::vector<bool> out;
  std::size_t i = 0;
  while (i < ops.size()) {
    std::size_t j = i;
    std::vector<LexTriple> batch;
    while (j < ops.size() && ops[j].kind == ops[i].kind) batch.push_back(ops[j++].triple);
    const auto res = ops[i].kind == UpdateKind::Insert ? batch_insert(batch) : batch_delete(batch);
    out.insert(out.end(), res.begin(), res.end());
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------

Metrics Master::metrics() {
  Metrics m;
  for (const auto& msg : round(Tag::MetricsRequest, {}, Tag::MetricsReply)) {
    Reader r(msg.payload);
    m.traffic += Traffic::read(r);
    m.main_counts.push_back(r.u64());
    m.replica_counts.push_back(r.u64());
  }
  m.traffic += ep_.meter().snapshot();
  std::uint64_t main = 0, replica = 0;
  for (auto c : m.main_counts) main += c;
  for (auto c : m.replica_counts) replica += c;
  m.replication_ratio = main == 0 ? 0.0 : static_cast<double>(replica) / static_cast<double>(main);
  m.gini_main = gini(std::span<const std::uint64_t>(m.main_counts));
  m.gini_replica = gini(std::span<const std::uint64_t>(m.replica_counts));
  m.duplicate_partial_rows = duplicate_rows_;
  return m;
}

double Master::replication_ratio() { return metrics().replication_ratio; }

std::vector<WorkerDump> Master::dump() {
  std::vector<WorkerDump> out;
  for (const auto& m : round(Tag::DumpRequest, {}, Tag::DumpReply)) {
    Reader r(m.payload);
    WorkerDump d;
    d.main = r.triples();
    const auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      auto e = read_edge(r);
      d.modules[e.id] = r.triples();
      d.edges.push_back(std::move(e));
    }
    out.push_back(std::move(d));
  }
  return out;
}

void Master::inject_fault(std::size_t worker, Tag command, std::uint32_t count) {
  const auto op = ++op_;
  Writer w;
  w.u8(static_cast<std::uint8_t>(command)).u32(count);
  ep_.send(static_cast<NodeId>(worker), Tag::InjectFault, op, w.take());
  ep_.collect(op, Tag::Ack, 1, cfg_.timeout);
}

void Master::shutdown() {
  const auto op = ++op_;
  for (std::size_t w = 0; w < n_; ++w) {
    try {
      ep_.send(static_cast<NodeId>(w), Tag::Shutdown, op, {});
    } catch (const TransportError&) {
    }
  }
}

}  // namespace phd
