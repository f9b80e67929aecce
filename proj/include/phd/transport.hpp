#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "phd/metrics.hpp"
#include "phd/wire.hpp"

namespace phd {

using Millis = std::chrono::milliseconds;

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BarrierTimeout : public TransportError {
 public:
  using TransportError::TransportError;
};

/// A peer reported that it failed the current operation.
class RemoteFault : public std::runtime_error {
 public:
  RemoteFault(NodeId node, const std::string& what)
      : std::runtime_error("node " + std::to_string(node) + ": " + what), node_(node) {}
  NodeId node() const { return node_; }

 private:
  NodeId node_;
};

/// Unbounded FIFO of decoded messages.
class Mailbox {
 public:
  void push(Message m);
  /// Waits until a message arrives, the deadline passes or the box closes.
  std::optional<Message> pop(std::chrono::steady_clock::time_point deadline);
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> q_;
  bool closed_ = false;
};

/// One node's view of the network. Subclasses move frame bytes; this class
/// encodes, counts, throttles and implements the receive side with a stash
/// so that messages of a later operation are kept until asked for.
class Endpoint {
 public:
  explicit Endpoint(NodeId id);
  virtual ~Endpoint() = default;
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  NodeId id() const { return id_; }

  void send(NodeId to, Tag tag, std::uint32_t op, std::string payload);

  /// Next message from the master or a client (a command). Anything else
  /// is stashed. Returns nullopt on timeout or when the endpoint is closed.
  std::optional<Message> next_command(Millis timeout);

  /// Blocks until `count` messages with this tag and op have arrived.
  /// Messages of older ops are dropped; newer ones are stashed. A Fault for
  /// this op raises RemoteFault.
  std::vector<Message> collect(std::uint32_t op, Tag tag, std::size_t count, Millis timeout);

  /// Drops stashed messages that belong to operations before `op`.
  void discard_before(std::uint32_t op);

  const TrafficMeter& meter() const { return meter_; }
  virtual void close();
  bool closed() const { return closed_.load(); }

  /// Called by transports with one complete frame.
  void on_frame(std::string_view frame);

 protected:
  virtual void deliver(NodeId to, std::string frame) = 0;
  void deliver_local(Message m) { inbox_.push(std::move(m)); }

 private:
  NodeId id_;
  TrafficMeter meter_;
  Mailbox inbox_;
  std::deque<Message> stash_;
  double bw_limit_ = 0.0;  // bytes per second for remote sends, 0 = unlimited
  std::atomic<bool> closed_{false};
};

// ---------------------------------------------------------------------------
// In-process

class InprocNetwork {
 public:
  std::unique_ptr<Endpoint> endpoint(NodeId id);
  void route(NodeId to, std::string frame);

 private:
  friend class InprocEndpoint;
  void detach(NodeId id);
  std::mutex mu_;
  std::map<NodeId, Endpoint*> nodes_;
};

// ---------------------------------------------------------------------------
// TCP

struct Address {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

Address parse_address(const std::string& text);  // "host:port"

/// Every node listens; outgoing frames use a lazily opened connection to the
/// directory address of the target. Nodes without a directory entry (clients)
/// are answered over the connection they came in on.
class TcpEndpoint : public Endpoint {
 public:
  /// Listens on `bind.port` (0 picks a free port).
  TcpEndpoint(NodeId id, const Address& bind);
  ~TcpEndpoint() override;

  std::uint16_t port() const { return port_; }
  void set_address(NodeId node, const Address& a);
  void close() override;

 protected:
  void deliver(NodeId to, std::string frame) override;

 private:
  struct Conn {
    int fd = -1;
    std::mutex write_mu;
  };
  void accept_loop();
  void read_loop(std::shared_ptr<Conn> c);
  std::shared_ptr<Conn> connection_to(NodeId to);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::mutex mu_;
  std::map<NodeId, Address> directory_;
  std::map<NodeId, std::shared_ptr<Conn>> outgoing_;
  std::map<NodeId, std::shared_ptr<Conn>> incoming_;  // reply path per sender
  std::vector<std::shared_ptr<Conn>> accepted_;
  std::thread acceptor_;
  std::vector<std::thread> readers_;
  bool closed_ = false;
};

/// Blocking client connection to a master (used by the CLI).
class TcpClient {
 public:
  explicit TcpClient(const Address& master);
  ~TcpClient();
  Message request(Tag tag, std::string payload, Millis timeout);

 private:
  int fd_ = -1;
};

void write_frame(int fd, const std::string& frame);
/// Reads one frame; returns false on orderly EOF before any byte.
bool read_frame(int fd, std::string& frame);

}  // namespace phd
