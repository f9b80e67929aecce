#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "phd/adaptivity.hpp"
#include "phd/metrics.hpp"
#include "phd/planner.hpp"
#include "phd/protocol.hpp"
#include "phd/stats.hpp"
#include "phd/transport.hpp"

namespace phd {

/// The cluster could not complete an operation (a worker fault or timeout).
class ClusterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MasterConfig {
  AdaptivityConfig adaptivity;
  bool adaptive = true;  // record queries and trigger redistribution
  std::string type_predicate = "type";
  std::uint64_t seed = 0;  // insert placement RNG
  Millis timeout{30000};
};

/// Set of projected rows, sorted, no duplicates. A boolean query has an
/// empty header and one empty row when true.
struct ResultSet {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const ResultSet&, const ResultSet&) = default;
  std::string to_text() const;  // header line, then tab separated rows
};

struct QueryReport {
  ResultSet result;
  QueryMode mode = QueryMode::SemiJoin;
  bool triggered = false;     // this query caused a redistribution
  double wall_ms = 0.0;       // execution plus any redistribution
  double redistribute_ms = 0.0;
};

struct RedistReport {
  std::vector<EdgeId> new_edges;
  std::uint64_t moved = 0;  // triples received by workers
};

/// What one worker holds, in lexical form (for tests and the CLI).
struct WorkerDump {
  std::vector<LexTriple> main;
  std::vector<IndexEdge> edges;
  std::map<EdgeId, std::vector<LexTriple>> modules;
};

struct UpdateOp {
  UpdateKind kind = UpdateKind::Insert;
  LexTriple triple;
};

/// Lines of a triple file prefixed with '+' or '-'.
std::vector<UpdateOp> parse_updates(std::string_view text);

/// Coordinator. Serializes every cluster operation; each is a round of one
/// command to all workers followed by a barrier on their replies.
class Master {
 public:
  Master(std::size_t workers, Endpoint& ep, MasterConfig cfg);

  std::size_t workers() const { return n_; }
  const MasterConfig& config() const { return cfg_; }
  MasterConfig& config() { return cfg_; }

  /// Distributes triples round-robin (or per `assignment`) and refreshes stats.
  void load(const std::vector<LexTriple>& triples, const std::vector<std::size_t>* assignment = nullptr);
  const GlobalStats& collect_stats();
  const GlobalStats& stats() const { return stats_; }

  /// Full workflow: execute (parallel if eligible), record, maybe redistribute.
  QueryReport run(const BgpQuery& q);

  ResultSet execute_distributed(const BgpQuery& q);
  ResultSet execute_parallel(const BgpQuery& q, const RedistTree& tree, const Embedding& emb);

  /// Tree for q, or nullopt when q has a variable predicate or no core.
  std::optional<RedistTree> plan(const BgpQuery& q) const;
  std::optional<Embedding> eligible(const RedistTree& tree) const {
    return check_parallel_eligibility(tree, query_index_);
  }

  RedistReport redistribute(const RedistTree& tree);

  std::vector<bool> batch_delete(const std::vector<LexTriple>& triples);
  std::vector<bool> batch_insert(const std::vector<LexTriple>& triples);
  /// Applies consecutive runs of the same kind as one batch, in file order.
  std::vector<bool> apply_updates(const std::vector<UpdateOp>& ops);

  Metrics metrics();
  double replication_ratio();
  std::vector<WorkerDump> dump();

  const IndexStructure& query_index() const { return query_index_; }
  const TemplateRegistry& templates() const { return templates_; }

  /// The worker fails its next `count` commands with this tag.
  void inject_fault(std::size_t worker, Tag command, std::uint32_t count);
  void shutdown();

 private:
  std::vector<Message> round(Tag command, const std::string& payload, Tag reply);
  std::vector<Message> round_each(Tag command, const std::vector<std::string>& payloads, Tag reply);
  std::vector<std::uint64_t> cardinalities(const std::vector<TriplePattern>& patterns);
  ResultSet finish(const BgpQuery& q, const std::vector<Message>& partials, bool check_disjoint);

  std::size_t n_;
  Endpoint& ep_;
  MasterConfig cfg_;
  std::uint32_t op_ = 0;
  GlobalStats stats_;
  IndexStructure query_index_;
  TemplateRegistry templates_;
  std::mt19937_64 rng_;
  std::uint64_t duplicate_rows_ = 0;
};

}  // namespace phd
