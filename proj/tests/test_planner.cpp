#include <gtest/gtest.h>

#include <random>
#include <set>

#include "phd/planner.hpp"
#include "test_util.hpp"

using namespace phd;

namespace {

// The department tree and the university tree joined on ?u.
const char* kUniversityQuery =
    "SELECT * WHERE { ?d subOrgOf ?u . ?d type department . ?s memberOf ?d . ?s undergradFrom ?u . "
    "?u type university }";

/// Predicate scores with subOrgOf 3, type 1 and memberOf 4 around ?d, and
/// higher object scores into ?u.
GlobalStats university_stats() {
  GlobalStats raw;
  raw.raw = {{"subOrgOf", {3, 6}}, {"type", {1, 1}}, {"memberOf", {1, 4}}, {"undergradFrom", {1, 5}}};
  return effective_scores(raw);
}

const TreeEdge& edge_with(const RedistTree& t, const std::string& predicate, const std::string& child) {
  for (const auto& e : t.edges) {
    if (e.predicate == predicate && t.vertices[e.child_vertex].text == child) return e;
  }
  throw std::runtime_error("no tree edge " + predicate + " -> " + child);
}

void check_tree_shape(const BgpQuery& q, const RedistTree& t) {
  ASSERT_EQ(t.edges.size(), q.patterns.size());
  std::set<std::size_t> patterns;
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const auto& e = t.edges[i];
    patterns.insert(e.pattern);
    if (e.parent < 0) {
      EXPECT_EQ(e.level, 1);
      EXPECT_EQ(e.parent_vertex, t.root);
    } else {
      ASSERT_LT(static_cast<std::size_t>(e.parent), i);
      const auto& p = t.edges[static_cast<std::size_t>(e.parent)];
      EXPECT_EQ(e.level, p.level + 1);
      EXPECT_EQ(e.parent_vertex, p.child_vertex);
    }
    const auto& tp = q.patterns[e.pattern];
    const auto& parent = t.vertices[e.parent_vertex];
    EXPECT_EQ(e.direction == Direction::Forward ? tp.s : tp.o, parent);
  }
  EXPECT_EQ(patterns.size(), q.patterns.size());
}

}  // namespace

TEST(Core, UniversityQuerySelectsU) {
  auto g = to_query_graph(parse_query(kUniversityQuery));
  score_vertices(g, university_stats());
  EXPECT_DOUBLE_EQ(g.scores[g.vertex_index(PatternTerm::var("?d"))], 4.0);
  EXPECT_EQ(g.vertices[select_core(g)].text, "?u");
}

TEST(Core, AllTypeQueryHasNoCore) {
  auto g = to_query_graph(parse_query("SELECT * WHERE { ?x type ?c . ?y type ?c }"));
  score_vertices(g, university_stats());
  EXPECT_THROW(select_core(g), NoCoreError);
}

TEST(Core, GradFromPicksObject) {
  GlobalStats raw;
  raw.raw = {{"gradFrom", {1.5, 4.0}}};
  const auto t = plan_tree(parse_query("SELECT * WHERE { ?s gradFrom ?u }"), effective_scores(raw));
  EXPECT_EQ(t.root_term().text, "?u");
  ASSERT_EQ(t.edges.size(), 1u);
  EXPECT_EQ(t.edges[0].level, 1);
  EXPECT_EQ(t.edges[0].direction, Direction::Backward);
}

TEST(Core, TiesGoToLexicallySmallest) {
  GlobalStats raw;
  raw.raw = {{"p", {2, 2}}};
  const auto t = plan_tree(parse_query("SELECT * WHERE { ?b p ?a }"), effective_scores(raw));
  EXPECT_EQ(t.root_term().text, "?a");
}

TEST(Tree, UniversityQueryTree) {
  const auto q = parse_query(kUniversityQuery);
  const auto t = plan_tree(q, university_stats());
  check_tree_shape(q, t);
  EXPECT_EQ(t.root_term().text, "?u");
  const auto& sub = edge_with(t, "subOrgOf", "?d");
  EXPECT_EQ(sub.level, 1);
  EXPECT_EQ(sub.direction, Direction::Backward);
  const auto& mem = edge_with(t, "memberOf", "?s");
  EXPECT_EQ(mem.level, 2);
  EXPECT_EQ(t.edges[static_cast<std::size_t>(mem.parent)].predicate, "subOrgOf");
  EXPECT_EQ(edge_with(t, "type", "department").level, 2);
  EXPECT_EQ(edge_with(t, "undergradFrom", "?s").level, 1);
  EXPECT_EQ(edge_with(t, "type", "university").level, 1);
  EXPECT_EQ(t.levels, 2);
}

TEST(Tree, SingleEdge) {
  const auto q = parse_query("SELECT * WHERE { ?a p ?b }");
  const auto t = build_redistribution_tree(to_query_graph(q), 0);
  EXPECT_EQ(t.edges.size(), 1u);
  EXPECT_EQ(t.levels, 1);
}

TEST(Tree, SelfLoop) {
  const auto q = parse_query("SELECT * WHERE { ?a p ?a . ?a q ?b }");
  const auto t = plan_tree(q, effective_scores(GlobalStats{{{"p", {1, 1}}, {"q", {2, 1}}}, {}}));
  check_tree_shape(q, t);
}

TEST(Tree, RandomQueriesAreWellFormed) {
  std::mt19937_64 rng(99);
  const auto data = phd::testing::random_graph(rng, 2000, 12, 150);
  GlobalStats raw;
  for (int p = 0; p < 12; ++p) raw.raw["p" + std::to_string(p)] = {double(rng() % 7), double(rng() % 7)};
  const auto stats = effective_scores(raw);
  for (int i = 0; i < 100; ++i) {
    const auto q = phd::testing::random_query(rng, data, 6, 1.0);
    auto g = to_query_graph(q);
    score_vertices(g, stats);
    const auto t = build_redistribution_tree(g, select_core(g));
    check_tree_shape(q, t);
  }
}

namespace {

IndexStructure index_of(const RedistTree& t) {
  IndexStructure idx;
  std::vector<EdgeId> id_of(t.edges.size());
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const auto& e = t.edges[i];
    IndexEdge ie;
    ie.id = idx.next_id();
    ie.parent = e.parent < 0 ? kNoEdge : id_of[static_cast<std::size_t>(e.parent)];
    ie.root_label = index_label(t.root_term());
    ie.predicate = e.predicate;
    ie.direction = e.direction;
    ie.child_label = index_label(t.child_term(i));
    ie.level = e.level;
    ie.active = true;
    id_of[i] = ie.id;
    idx.add(ie);
  }
  return idx;
}

}  // namespace

TEST(Eligibility, FullQueryEligibleAfterBothTrees) {
  const auto stats = university_stats();
  auto plan_u = [&](const char* text) {
    auto g = to_query_graph(parse_query(text));
    score_vertices(g, stats);
    return build_redistribution_tree(g, g.vertex_index(PatternTerm::var("?u")));
  };
  auto idx = index_of(plan_u("SELECT * WHERE { ?d subOrgOf ?u . ?d type department . ?s memberOf ?d }"));
  const auto full = plan_tree(parse_query(kUniversityQuery), stats);
  EXPECT_FALSE(check_parallel_eligibility(full, idx));

  const auto q2 = index_of(plan_u("SELECT * WHERE { ?s undergradFrom ?u . ?u type university }"));
  for (const auto& e : q2.edges()) {
    auto copy = e;
    copy.id = idx.next_id();
    idx.add(copy);
  }
  const auto emb = check_parallel_eligibility(full, idx);
  ASSERT_TRUE(emb);
  EXPECT_EQ(emb->root_label, "?");
  std::set<EdgeId> used(emb->edge_of.begin(), emb->edge_of.end());
  EXPECT_EQ(used.size(), full.edges.size());
}

TEST(Eligibility, ConstantLabelsOnlyCoverTheSameConstant) {
  GlobalStats raw;
  raw.raw = {{"memberOf", {1, 4}}};
  const auto stats = effective_scores(raw);
  const auto idx = index_of(plan_tree(parse_query("SELECT * WHERE { ?s memberOf Stanford-CS }"), stats));
  EXPECT_TRUE(check_parallel_eligibility(plan_tree(parse_query("SELECT * WHERE { ?p memberOf Stanford-CS }"), stats),
                                         idx));
  EXPECT_FALSE(check_parallel_eligibility(plan_tree(parse_query("SELECT * WHERE { ?p memberOf MIT-CS }"), stats), idx));

  // A wildcard index covers any constant.
  const auto wild = index_of(plan_tree(parse_query("SELECT * WHERE { ?s memberOf ?d }"), stats));
  EXPECT_TRUE(check_parallel_eligibility(plan_tree(parse_query("SELECT * WHERE { ?p memberOf MIT-CS }"), stats), wild));
}

TEST(Eligibility, InactiveEdgesDoNotCount) {
  GlobalStats raw;
  raw.raw = {{"p", {1, 2}}};
  const auto t = plan_tree(parse_query("SELECT * WHERE { ?a p ?b }"), effective_scores(raw));
  IndexStructure idx = index_of(t);
  EXPECT_TRUE(check_parallel_eligibility(t, idx));
  idx.remove({0});
  EXPECT_FALSE(check_parallel_eligibility(t, idx));
  EXPECT_FALSE(check_parallel_eligibility(t, IndexStructure{}));
}

TEST(Eligibility, DirectionMatters) {
  GlobalStats raw;
  raw.raw = {{"p", {1, 2}}};
  const auto stats = effective_scores(raw);
  const auto fwd = plan_tree(parse_query("SELECT * WHERE { ?a p ?b . ?b p ?c }"), stats);
  const auto idx = index_of(fwd);
  EXPECT_TRUE(check_parallel_eligibility(fwd, idx));
  const auto other = build_redistribution_tree(to_query_graph(parse_query("SELECT * WHERE { ?a p ?b . ?b p ?c }")), 0);
  EXPECT_FALSE(check_parallel_eligibility(other, idx));
}

TEST(IndexStructureTest, ChildrenUniqueByKey) {
  IndexStructure idx;
  idx.add(IndexEdge{0, kNoEdge, "?", "p", Direction::Forward, "?", 1, true});
  EXPECT_EQ(idx.find_child(kNoEdge, "?", "p", Direction::Forward, "?"), std::optional<EdgeId>(0));
  EXPECT_FALSE(idx.find_child(kNoEdge, "?", "p", Direction::Backward, "?"));
  EXPECT_FALSE(idx.find_child(kNoEdge, "MIT", "p", Direction::Forward, "?"));
  EXPECT_EQ(idx.active_size(), 1u);
}

TEST(JoinOrder, StartsFromLeastCardinalityAndStaysConnected) {
  const auto q = parse_query("SELECT * WHERE { ?a p ?b . ?b q ?c . ?c r ?d . ?a s ?e }");
  const auto plan = order_joins(q, {50, 30, 1, 40});
  EXPECT_EQ(plan.order, (std::vector<std::size_t>{2, 1, 0, 3}));
  EXPECT_TRUE(plan.on[0].empty());
  EXPECT_EQ(plan.on[1], std::vector<std::string>{"?c"});
  EXPECT_EQ(plan.on[2], std::vector<std::string>{"?b"});
  EXPECT_EQ(plan.on[3], std::vector<std::string>{"?a"});
}
