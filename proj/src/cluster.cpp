#include "phd/cluster.hpp"

#include <cmath>

namespace phd {

ClusterOptions options_from_config(const Config& cfg) {
  ClusterOptions o;
  const auto n = cfg.get_int("workers", 2);
  if (n < 1 || n > 0xFFF0) throw InputError("workers must be in [1, 65520]");
  o.workers = static_cast<std::size_t>(n);
  const auto transport = cfg.get("transport", "inproc");
  if (transport == "inproc") {
    o.transport = TransportKind::Inproc;
  } else if (transport == "tcp") {
    o.transport = TransportKind::Tcp;
  } else {
    throw InputError("transport must be inproc or tcp, got " + transport);
  }
  o.placement = Placement(o.workers);
  if (cfg.has("hash_pin_file")) o.placement.load_pin_file(cfg.get("hash_pin_file", ""));
  auto& a = o.master.adaptivity;
  const auto freq = cfg.get_int("freq_threshold", 3);
  const auto pro = cfg.get_int("proactivity_threshold", 10);
  a.rho_max = cfg.get_double("rho_max", INFINITY);
  if (freq < 0 || pro < 0 || a.rho_max < 0) throw InputError("adaptivity thresholds must be >= 0");
  a.freq_threshold = static_cast<std::uint64_t>(freq);
  a.proactivity_threshold = static_cast<std::uint64_t>(pro);
  o.master.adaptive = cfg.get_bool("adaptive", true);
  o.master.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  o.master.type_predicate = cfg.get("type_predicate", "type");
  o.master.timeout = Millis(cfg.get_int("timeout_ms", 30000));
  return o;
}

LocalCluster::LocalCluster(ClusterOptions opts) : opts_(std::move(opts)) {
  const auto n = opts_.workers;
  if (n == 0) throw std::invalid_argument("a cluster needs at least one worker");
  if (opts_.placement.workers() != n) {
    throw std::invalid_argument("placement is for " + std::to_string(opts_.placement.workers()) + " workers");
  }
  if (opts_.transport == TransportKind::Inproc) {
    master_ep_ = net_.endpoint(kMasterId);
    for (std::size_t w = 0; w < n; ++w) worker_eps_.push_back(net_.endpoint(static_cast<NodeId>(w)));
  } else {
    auto m = std::make_unique<TcpEndpoint>(kMasterId, Address{"127.0.0.1", 0});
    const Address master_addr{"127.0.0.1", m->port()};
    for (std::size_t w = 0; w < n; ++w) {
      worker_eps_.push_back(std::make_unique<TcpEndpoint>(static_cast<NodeId>(w), Address{"127.0.0.1", 0}));
    }
    std::vector<std::thread> registrations;
    for (auto& ep : worker_eps_) {
      auto* tcp = static_cast<TcpEndpoint*>(ep.get());
      registrations.emplace_back(
          [tcp, master_addr, this] { register_with_master(*tcp, master_addr, "127.0.0.1", opts_.master.timeout); });
    }
    await_registration(*m, n, opts_.master.timeout);
    for (auto& t : registrations) t.join();
    master_ep_ = std::move(m);
  }
  for (std::size_t w = 0; w < n; ++w) {
    worker_nodes_.push_back(std::make_unique<Worker>(static_cast<NodeId>(w), n, *worker_eps_[w], opts_.placement,
                                                     opts_.master.timeout));
    threads_.emplace_back([node = worker_nodes_.back().get()] { node->run(); });
  }
  master_ = std::make_unique<Master>(n, *master_ep_, opts_.master);
}

LocalCluster::~LocalCluster() {
  if (master_) master_->shutdown();
  for (auto& t : threads_) t.join();
  for (auto& ep : worker_eps_) ep->close();
  if (master_ep_) master_ep_->close();
}

void await_registration(TcpEndpoint& master, std::size_t workers, Millis timeout) {
  auto regs = master.collect(0, Tag::Register, workers, timeout);
  std::vector<std::pair<NodeId, Address>> dir;
  for (const auto& m : regs) {
    Reader r(m.payload);
    Address a;
    a.host = r.str();
    a.port = r.u16();
    if (m.sender >= workers) throw TransportError("worker id " + std::to_string(m.sender) + " out of range");
    for (const auto& [id, _] : dir) {
      if (id == m.sender) throw TransportError("worker id " + std::to_string(id) + " registered twice");
    }
    master.set_address(m.sender, a);
    dir.emplace_back(m.sender, a);
  }
  Writer w;
  w.u32(static_cast<std::uint32_t>(dir.size()));
  for (const auto& [id, a] : dir) w.u16(id).str(a.host).u16(a.port);
  const auto payload = w.take();
  for (const auto& [id, _] : dir) master.send(id, Tag::PeerDirectory, 0, payload);
}

void register_with_master(TcpEndpoint& worker, const Address& master, const std::string& advertised_host,
                          Millis timeout) {
  worker.set_address(kMasterId, master);
  Writer w;
  w.str(advertised_host).u16(worker.port());
  worker.send(kMasterId, Tag::Register, 0, w.take());
  // The directory comes from the master, so it is a command-sender message.
  auto m = worker.next_command(timeout);
  if (!m || m->tag != Tag::PeerDirectory) throw TransportError("no peer directory from master");
  Reader r(m->payload);
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto id = r.u16();
    Address a;
    a.host = r.str();
    a.port = r.u16();
    worker.set_address(id, a);
  }
}

}  // namespace phd
