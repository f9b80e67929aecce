#pragma once

#include <memory>
#include <thread>
#include <vector>

#include "phd/config.hpp"
#include "phd/hashing.hpp"
#include "phd/master.hpp"
#include "phd/transport.hpp"
#include "phd/worker.hpp"

namespace phd {

enum class TransportKind { Inproc, Tcp };

struct ClusterOptions {
  std::size_t workers = 2;
  TransportKind transport = TransportKind::Inproc;
  Placement placement{2};
  MasterConfig master;
};

/// Reads workers, transport, freq_threshold, proactivity_threshold, rho_max,
/// hash_pin_file, seed, type_predicate, adaptive and timeout_ms.
ClusterOptions options_from_config(const Config& cfg);

/// Master plus N worker threads inside this process. With TCP transport every
/// node listens on a loopback port and workers register with the master.
class LocalCluster {
 public:
  explicit LocalCluster(ClusterOptions opts);
  ~LocalCluster();
  LocalCluster(const LocalCluster&) = delete;
  LocalCluster& operator=(const LocalCluster&) = delete;

  Master& master() { return *master_; }
  std::size_t workers() const { return opts_.workers; }

 private:
  ClusterOptions opts_;
  InprocNetwork net_;
  std::unique_ptr<Endpoint> master_ep_;
  std::vector<std::unique_ptr<Endpoint>> worker_eps_;
  std::vector<std::unique_ptr<Worker>> worker_nodes_;
  std::vector<std::thread> threads_;
  std::unique_ptr<Master> master_;
};

/// Master side of TCP bootstrap: waits for `workers` Register messages and
/// answers every worker with the full peer directory.
void await_registration(TcpEndpoint& master, std::size_t workers, Millis timeout);

/// Worker side: registers at the master, then installs the peer directory.
void register_with_master(TcpEndpoint& worker, const Address& master, const std::string& advertised_host,
                          Millis timeout);

}  // namespace phd
