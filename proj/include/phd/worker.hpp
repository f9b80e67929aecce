#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "phd/hashing.hpp"
#include "phd/replica.hpp"
#include "phd/storage.hpp"
#include "phd/transport.hpp"

namespace phd {

/// One worker: main index, replica index and a sequential command loop.
/// Every multi-party step sends to all N workers (itself included) and then
/// waits for exactly N peer messages of the step's tag.
class Worker {
 public:
  Worker(NodeId id, std::size_t workers, Endpoint& ep, Placement placement, Millis timeout);

  /// Serves commands until Shutdown or until the endpoint closes.
  void run();

 private:
  void handle(const Message& m);
  void reply(Tag tag, std::string payload);
  void to_all(Tag tag, const std::string& payload);
  std::vector<Message> gather(Tag tag);

  void on_load(Reader& r);
  void on_stats();
  void on_cardinality(Reader& r);
  void on_query(Reader& r);
  void on_semijoin_step(Reader& r);
  void on_result_request();
  void on_redist_begin(Reader& r);
  void on_redist_level(Reader& r);
  void on_redist_finish(Reader& r, bool commit);
  void on_update_batch(Reader& r);
  void on_insert_level(Reader& r);
  void on_metrics();
  void on_dump();
  void on_inject_fault(Reader& r);

  void delete_from_replicas(const LexTriple& t);
  void cascade(EdgeId edge, TermId value);

  BindingTable to_table(const LexTable& t, bool intern);
  LexTable to_lex(const BindingTable& t) const;
  std::vector<LexTriple> to_lex(const std::vector<Triple>& ts) const;

  NodeId id_;
  std::size_t n_;
  Endpoint& ep_;
  Placement placement_;
  Millis timeout_;
  std::uint32_t op_ = 0;
  Message current_;

  WorkerStore store_;
  ReplicaIndex replicas_;

  BindingTable prefix_;                               // semi-join state of the running query
  std::vector<LexTriple> batch_;                      // insert batch being applied
  std::map<EdgeId, std::set<std::string>> new_values_;  // child values new in this batch
  std::map<std::uint8_t, std::uint32_t> faults_;      // command tag -> failures left
};

}  // namespace phd
