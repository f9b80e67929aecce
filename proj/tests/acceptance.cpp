// Acceptance suite: one PASS/FAIL line per criterion, with wall time.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "test_util.hpp"

using namespace phd;
using namespace phd::testing;
using Set = std::set<LexTriple>;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    if (!cond && ok) detail << what;
    ok = ok && cond;
  }
};

const char* kUniversityQuery =
    "SELECT * WHERE { ?d subOrgOf ?u . ?d type department . ?s memberOf ?d . ?s undergradFrom ?u . "
    "?u type university }";
const char* kQ1 = "SELECT ?u WHERE { ?d subOrgOf ?u . ?d type department . ?s memberOf ?d }";
const char* kQ2 = "SELECT ?u WHERE { ?s undergradFrom ?u . ?u type university }";

void c1(Outcome& o) {
  LocalCluster c(options(1));
  c.master().load(academic());
  const auto s = c.master().stats().raw.at("worksFor");
  o.detail << "pS(worksFor)=" << s.subject << " pO(worksFor)=" << s.object << " (want 3.33, 3.5); ";
  o.check(std::abs(s.subject - 10.0 / 3.0) <= 0.01 && s.object == 3.5, "fixture degrees give other scores");
}

void c2(Outcome& o) {
  // Predicate scores around ?d: subOrgOf 3, type 1, memberOf 4.
  GlobalStats raw;
  raw.raw = {{"subOrgOf", {3, 6}}, {"type", {1, 1}}, {"memberOf", {1, 4}}, {"undergradFrom", {1, 5}}};
  const auto stats = effective_scores(raw);
  const auto q = parse_query(kUniversityQuery);
  auto g = to_query_graph(q);
  score_vertices(g, stats);
  const double d = g.scores[g.vertex_index(PatternTerm::var("?d"))];
  const auto core = select_core(g);
  const auto t = build_redistribution_tree(g, core);
  bool sub_l1 = false, mem_l2 = false;
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const auto& e = t.edges[i];
    if (e.predicate == "subOrgOf" && e.level == 1 && t.child_term(i).text == "?d") sub_l1 = true;
    if (e.predicate == "memberOf" && e.level == 2 && t.edges[static_cast<std::size_t>(e.parent)].predicate == "subOrgOf")
      mem_l2 = true;
  }
  o.detail << "score(?d)=" << d << " core=" << g.vertices[core].text;
  o.check(d == 4.0, "; ?d score");
  o.check(g.vertices[core].text == "?u", "; core");
  o.check(sub_l1, "; subOrgOf not at level 1");
  o.check(mem_l2, "; memberOf not at level 2 under subOrgOf");
}

void c3(Outcome& o) {
  LocalCluster c(options(2, "Stanford* 0\nMIT* 1\n"));
  auto& m = c.master();
  m.load(academic());
  m.redistribute(tree_rooted_at(parse_query("SELECT * WHERE { ?d subOrgOf ?u . ?s memberOf ?d }"), m.stats(), "?u"));
  const auto d = m.dump();
  o.check(module_of(d[0], "subOrgOf", "?") ==
              Set{T("Stanford-CS", "subOrgOf", "Stanford"), T("Stanford-ENG", "subOrgOf", "Stanford")},
          "t1,t2 not on w1; ");
  o.check(module_of(d[1], "subOrgOf", "?") == Set{T("MIT-CS", "subOrgOf", "MIT")}, "t3 not on w2; ");
  o.check(module_of(d[0], "memberOf", "?") == Set{T("Ben", "memberOf", "Stanford-CS"),
                                                  T("Prof.James", "memberOf", "Stanford-ENG"),
                                                  T("John", "memberOf", "Stanford-ENG")},
          "t4..t6 not on w1; ");
  o.check(module_of(d[1], "memberOf", "?") == Set{T("Peter", "memberOf", "MIT-CS")}, "t7 not on w2; ");
  o.detail << "replication ratio " << m.replication_ratio();
}

void c4(Outcome& o) {
  LocalCluster c(options(2, "MIT* 0\nEECS 0\nStanford* 1\n"));
  auto& m = c.master();
  m.load(academic());
  m.redistribute(tree_rooted_at(parse_query(kQ1), m.stats(), "?u"));
  m.redistribute(tree_rooted_at(parse_query(kQ2), m.stats(), "?u"));
  const auto w2 = m.dump()[1].modules;

  m.batch_delete({T("MIT-CS", "subOrgOf", "MIT"), T("MIT", "type", "university")});
  auto d = m.dump();
  o.check(module_of(d[0], "memberOf", "?").empty(), "Peter memberOf MIT-CS survived; ");
  o.check(module_of(d[0], "type", "department").empty(), "MIT-CS type department survived; ");
  o.check(module_of(d[0], "subOrgOf", "?").empty() && module_of(d[0], "type", "university").empty(),
          "deleted triples survived; ");
  o.check(d[1].modules == w2, "w2 changed by delete; ");

  m.batch_insert({T("MIT-CS", "subOrgOf", "EECS"), T("MIT", "type", "university"), T("MIT-CS", "subOrgOf", "MIT")});
  d = m.dump();
  o.check(module_of(d[0], "subOrgOf", "?") == Set{T("MIT-CS", "subOrgOf", "EECS"), T("MIT-CS", "subOrgOf", "MIT")},
          "level-1 inserts; ");
  o.check(module_of(d[0], "type", "department") == Set{T("MIT-CS", "type", "department")}, "validated dept; ");
  o.check(module_of(d[0], "memberOf", "?") == Set{T("Peter", "memberOf", "MIT-CS")}, "validated memberOf; ");
  o.check(module_of(d[0], "type", "university") == Set{T("MIT", "type", "university")}, "university; ");
  o.check(d[1].modules == w2, "w2 changed by insert; ");
}

void c5(Outcome& o) {
  TemplateRegistry reg;
  AdaptivityConfig cfg;
  cfg.proactivity_threshold = 2;
  for (const char* q :
       {"SELECT ?p WHERE { ?p memberOf Stanford-CS . Stanford-CS subOrgOf Stanford . Stanford-CS type dept }",
        "SELECT ?p WHERE { ?p memberOf MIT-CS . MIT-CS subOrgOf MIT . MIT-CS type dept }",
        "SELECT ?p WHERE { ?p memberOf ?d . ?d subOrgOf ?u . ?d type dept }"}) {
    reg.record(parse_query(q), cfg);
  }
  o.check(reg.templates().size() == 1, "queries split over templates; ");
  if (reg.templates().size() != 1) return;
  const auto& t = reg.templates().begin()->second;
  o.detail << "frequency " << t.frequency << "; ";
  o.check(t.frequency == 3, "frequency; ");
  const auto inst = instantiate_template(t, cfg);
  const auto want = parse_query("SELECT * WHERE { ?p memberOf ?d . ?d subOrgOf ?u . ?d type dept }");
  o.detail << "instantiated " << to_string(inst);
  o.check(canonical_form(inst.patterns) == canonical_form(want.patterns), "; V2 or V3 wrong");
}

struct Suite6 {
  std::size_t parallel_runs = 0;
  std::size_t remote_violations = 0;
};

void c6(Outcome& o, Suite6& s) {
  std::mt19937_64 rng(2024);
  std::size_t checked = 0;
  for (int graph = 0; graph < 20 && o.ok; ++graph) {
    const std::size_t triples = 1000 + rng() % 9001;
    const std::size_t preds = 10 + rng() % 21;
    const auto data = random_graph(rng, triples, preds, triples / 4);
    std::vector<BgpQuery> qs;
    std::vector<ResultSet> want;
    for (int i = 0; i < 50; ++i) {
      qs.push_back(random_query(rng, data, 2 + rng() % 4));
      want.push_back(oracle(data, qs.back()));
    }
    for (int placement = 0; placement < 3 && o.ok; ++placement) {
      LocalCluster c(options(4));
      auto& m = c.master();
      std::vector<std::size_t> assign(data.size());
      for (auto& a : assign) a = rng() % 4;
      m.load(data, &assign);
      for (std::size_t i = 0; i < qs.size() && o.ok; ++i) {
        const auto& q = qs[i];
        o.check(m.execute_distributed(q) == want[i], "distributed differs on " + to_string(q));
        auto tree = m.plan(q);
        if (!tree) tree = tree_rooted_at(q, m.stats(), q.variables().front());
        m.redistribute(*tree);
        const auto emb = m.eligible(*tree);
        o.check(emb.has_value(), "not eligible after redistribution: " + to_string(q));
        if (!emb) break;
        const auto before = m.metrics().traffic.remote;
        o.check(m.execute_parallel(q, *tree, *emb) == want[i], "parallel differs on " + to_string(q));
        const auto after = m.metrics().traffic.remote;
        ++s.parallel_runs;
        if (after.frames_of(Tag::SubqueryProjection) != before.frames_of(Tag::SubqueryProjection) ||
            after.frames_of(Tag::CandidateRows) != before.frames_of(Tag::CandidateRows)) {
          ++s.remote_violations;
        }
        ++checked;
      }
      o.check(m.metrics().duplicate_partial_rows == 0, "overlapping parallel partials; ");
    }
  }
  o.detail << checked << " query/placement pairs, 3 modes agree";
}

struct Workload {
  std::vector<BgpQuery> queries;
  std::vector<std::size_t> template_of;
};

Workload make_workload(std::mt19937_64& rng, const std::vector<LexTriple>& data) {
  std::vector<BgpQuery> shapes;
  std::set<std::string> keys;
  while (shapes.size() < 10) {
    auto q = random_query(rng, data, 2 + rng() % 3, 0.75);
    if (keys.insert(derive_template(q).key).second) shapes.push_back(q);
  }
  Workload w;
  for (int i = 0; i < 500; ++i) {
    const auto t = rng() % shapes.size();
    auto q = shapes[t];
    auto vars = q.variables();
    std::shuffle(vars.begin(), vars.end(), rng);
    vars.resize(1 + rng() % vars.size());
    q.projection = vars;
    w.queries.push_back(q);
    w.template_of.push_back(t);
  }
  return w;
}

struct Suite8 {
  std::vector<std::uint64_t> remote_bytes;  // per query
};

void c8(Outcome& o, Suite8& s) {
  std::mt19937_64 rng(8);
  const auto data = random_graph(rng, 6000, 15, 1500);
  const auto w = make_workload(rng, data);
  std::map<std::size_t, ResultSet> want;

  auto run = [&](double rho_max, bool& any_trigger, std::vector<std::uint64_t>* bytes) {
    auto opts = options(4, "", true);
    opts.master.adaptivity.rho_max = rho_max;
    LocalCluster c(opts);
    auto& m = c.master();
    m.load(data);
    std::map<std::size_t, int> seen;
    double last_ratio = 0.0;
    auto last = m.metrics();
    for (std::size_t i = 0; i < w.queries.size(); ++i) {
      const auto& q = w.queries[i];
      const auto occurrence = ++seen[w.template_of[i]];
      const auto rep = m.run(q);
      if (!want.contains(i)) want[i] = oracle(data, q);
      o.check(rep.result == want[i], "result differs at query " + std::to_string(i + 1) + "; ");
      any_trigger = any_trigger || rep.triggered;
      const auto now = m.metrics();
      if (bytes) bytes->push_back(remote_bytes(now) - remote_bytes(last));
      if (std::isinf(rho_max)) {
        o.check(occurrence <= 4 || rep.mode == QueryMode::Parallel,
                "template " + std::to_string(w.template_of[i]) + " still semi-join at occurrence " +
                    std::to_string(occurrence) + "; ");
        o.check(now.replication_ratio >= last_ratio, "replication ratio decreased; ");
      }
      last_ratio = now.replication_ratio;
      last = now;
    }
    return last_ratio;
  };

  bool trig = false;
  const double final_ratio = run(std::numeric_limits<double>::infinity(), trig, &s.remote_bytes);
  o.detail << "final replication ratio " << final_ratio << "; ";
  bool trig0 = false;
  const double ratio0 = run(0.0, trig0, nullptr);
  o.check(!trig0 && ratio0 == 0.0, "rho_max=0 still redistributed; ");
  o.detail << "rho_max=0 ratio " << ratio0;
}

void c9(Outcome& o, const Suite8& s) {
  if (s.remote_bytes.size() != 500) {
    o.check(false, "criterion 8 workload did not complete");
    return;
  }
  std::uint64_t first = 0, last = 0;
  for (int i = 0; i < 100; ++i) first += s.remote_bytes[static_cast<std::size_t>(i)];
  for (int i = 400; i < 500; ++i) last += s.remote_bytes[static_cast<std::size_t>(i)];
  o.detail << "remote bytes q1-100=" << first << " q401-500=" << last;
  o.check(first > 0 && static_cast<double>(last) < 0.1 * static_cast<double>(first), "; no 10x reduction");
}

void c10(Outcome& o) {
  std::mt19937_64 rng(10);
  for (int pair = 0; pair < 20 && o.ok; ++pair) {
    auto data = random_graph(rng, 800 + rng() % 800, 4 + rng() % 5, 200);
    LocalCluster live(options(4));
    live.master().load(data);
    std::vector<RedistTree> trees;
    for (int i = 0; i < 3; ++i) {
      auto t = live.master().plan(random_query(rng, data, 2 + rng() % 3));
      live.master().redistribute(*t);
      trees.push_back(*t);
    }
    const auto before = live.master().dump();

    std::shuffle(data.begin(), data.end(), rng);
    const std::size_t k = 20 + rng() % 60;
    const std::vector<LexTriple> del(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(k));
    const std::set<LexTriple> have(data.begin(), data.end());
    std::vector<LexTriple> ins;
    for (const auto& t : random_graph(rng, data.size() + 200, 8, 200)) {
      if (!have.contains(t) && ins.size() < k) ins.push_back(t);
    }
    live.master().batch_delete(del);
    live.master().batch_insert(ins);

    std::vector<LexTriple> updated(data.begin() + static_cast<std::ptrdiff_t>(k), data.end());
    updated.insert(updated.end(), ins.begin(), ins.end());
    LocalCluster fresh(options(4));
    fresh.master().load(updated);
    for (const auto& t : trees) fresh.master().redistribute(t);
    o.check(replica_contents(live.master().dump()) == replica_contents(fresh.master().dump()),
            "pair " + std::to_string(pair) + ": incremental differs from scratch; ");

    // Undo: delete the inserted batch, re-insert the deleted one.
    live.master().batch_delete(ins);
    live.master().batch_insert(del);
    const auto back = live.master().dump();
    o.check(replica_contents(back) == replica_contents(before) && all_main(back) == all_main(before),
            "pair " + std::to_string(pair) + ": delete/insert did not restore; ");
  }
  o.detail << "20 state/batch pairs";
}

double gini_by_definition(const std::vector<double>& xs) {
  double diff = 0, sum = 0;
  for (double a : xs) {
    sum += a;
    for (double b : xs) diff += std::abs(a - b);
  }
  const double n = static_cast<double>(xs.size());
  return diff / (2 * n * n * (sum / n));
}

void c11(Outcome& o) {
  std::mt19937_64 rng(11);
  const auto data = random_graph(rng, 8000, 10, 2000);
  LocalCluster c(options(4));
  auto& m = c.master();
  m.load(data);
  for (int i = 0; i < 10; ++i) m.redistribute(*m.plan(random_query(rng, data, 2 + rng() % 3, 1.0)));
  const auto g = m.metrics().gini_replica;
  o.detail << "gini(replica) N=4 " << g << "; ";
  o.check(g < 0.3, "unbalanced; ");

  LocalCluster one(options(4, "* 0\n"));
  one.master().load(academic());
  one.master().redistribute(tree_rooted_at(parse_query(kQ1), one.master().stats(), "?u"));
  const auto skew = one.master().metrics();
  const double by_def = gini_by_definition({double(skew.replica_counts[0]), 0, 0, 0});
  o.detail << "all-on-one gini " << skew.gini_replica << " (definition " << by_def << ")";
  o.check(skew.replica_counts[0] > 0 && skew.gini_replica == 0.75 && by_def == 0.75, "; all-on-one gini != 0.75");
}

}  // namespace

int main() {
  int failed = 0;
  Suite6 s6;
  Suite8 s8;
  auto criterion = [&](int id, const char* name, double limit_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs >= limit_s) o.check(false, "; over time limit");
    std::printf("%s criterion %2d %-28s %8.3fs  %s\n", o.ok ? "PASS" : "FAIL", id, name, secs, o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.ok;
  };
  criterion(1, "statistics-exactness", 1, c1);
  criterion(2, "core-and-tree", 1, c2);
  criterion(3, "phd-placement", 1, c3);
  criterion(4, "update-reproduction", 1, c4);
  criterion(5, "template-reproduction", 1, c5);
  criterion(6, "oracle-equivalence", 300, [&](Outcome& o) { c6(o, s6); });
  criterion(7, "zero-communication", 0, [&](Outcome& o) {
    o.detail << s6.parallel_runs << " parallel runs, " << s6.remote_violations << " with remote semi-join traffic";
    o.check(s6.parallel_runs > 0 && s6.remote_violations == 0, "");
  });
  criterion(8, "adaptivity", 120, [&](Outcome& o) { c8(o, s8); });
  criterion(9, "communication-reduction", 0, [&](Outcome& o) { c9(o, s8); });
  criterion(10, "update-consistency", 120, c10);
  criterion(11, "load-balance", 0, c11);
  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
