#include "phd/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

namespace phd {

void Mailbox::push(Message m) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    q_.push_back(std::move(m));
  }
  cv_.notify_one();
}

std::optional<Message> Mailbox::pop(std::chrono::steady_clock::time_point deadline) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_until(lock, deadline, [&] { return closed_ || !q_.empty(); })) return std::nullopt;
  if (q_.empty()) return std::nullopt;
  Message m = std::move(q_.front());
  q_.pop_front();
  return m;
}

void Mailbox::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

// ---------------------------------------------------------------------------

namespace {

bool is_command_sender(NodeId n) { return n == kMasterId || n == kClientId; }

}  // namespace

Endpoint::Endpoint(NodeId id) : id_(id) {
  if (const char* bw = std::getenv("PHD_BW_LIMIT"); bw && *bw) bw_limit_ = std::strtod(bw, nullptr);
}

void Endpoint::send(NodeId to, Tag tag, std::uint32_t op, std::string payload) {
  Message m{tag, id_, op, std::move(payload)};
  std::string frame = encode_frame(m);
  meter_.record(tag, id_, to, frame.size());
  if (bw_limit_ > 0.0 && classify_link(id_, to) == LinkClass::Remote) {
    std::this_thread::sleep_for(std::chrono::duration<double>(static_cast<double>(frame.size()) / bw_limit_));
  }
  if (to == id_) {
    on_frame(frame);
    return;
  }
  deliver(to, std::move(frame));
}

void Endpoint::on_frame(std::string_view frame) { inbox_.push(decode_frame(frame)); }

std::optional<Message> Endpoint::next_command(Millis timeout) {
  for (auto it = stash_.begin(); it != stash_.end(); ++it) {
    if (is_command_sender(it->sender)) {
      Message m = std::move(*it);
      stash_.erase(it);
      return m;
    }
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (auto m = inbox_.pop(deadline)) {
    if (is_command_sender(m->sender)) return m;
    stash_.push_back(std::move(*m));
  }
  return std::nullopt;
}

std::vector<Message> Endpoint::collect(std::uint32_t op, Tag tag, std::size_t count, Millis timeout) {
  std::vector<Message> out;
  auto fault = [](const Message& m) { return RemoteFault(m.sender, m.payload); };
  for (auto it = stash_.begin(); it != stash_.end() && out.size() < count;) {
    if (it->op == op && it->tag == Tag::Fault) throw fault(*it);
    if (it->op == op && it->tag == tag) {
      out.push_back(std::move(*it));
      it = stash_.erase(it);
    } else if (it->op < op && !is_command_sender(it->sender)) {
      it = stash_.erase(it);
    } else {
      ++it;
    }
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (out.size() < count) {
    auto m = inbox_.pop(deadline);
    if (!m) {
      throw BarrierTimeout(std::string("node ") + std::to_string(id_) + " timed out waiting for " +
                           std::to_string(count - out.size()) + " more " + tag_name(tag) + " of op " +
                           std::to_string(op));
    }
    if (m->op == op && m->tag == Tag::Fault) throw fault(*m);
    if (m->op == op && m->tag == tag) {
      out.push_back(std::move(*m));
    } else if (m->op < op && !is_command_sender(m->sender)) {
      continue;  // stale reply of an aborted operation
    } else {
      stash_.push_back(std::move(*m));
    }
  }
  return out;
}

void Endpoint::discard_before(std::uint32_t op) {
  std::erase_if(stash_, [&](const Message& m) { return m.op < op && !is_command_sender(m.sender); });
}

void Endpoint::close() {
  closed_ = true;
  inbox_.close();
}

// ---------------------------------------------------------------------------

class InprocEndpoint : public Endpoint {
 public:
  InprocEndpoint(NodeId id, InprocNetwork* net) : Endpoint(id), net_(net) {}
  ~InprocEndpoint() override { net_->detach(id()); }

 protected:
  void deliver(NodeId to, std::string frame) override { net_->route(to, std::move(frame)); }

 private:
  InprocNetwork* net_;
};

std::unique_ptr<Endpoint> InprocNetwork::endpoint(NodeId id) {
  auto ep = std::make_unique<InprocEndpoint>(id, this);
  std::lock_guard lock(mu_);
  if (!nodes_.emplace(id, ep.get()).second) throw TransportError("duplicate node id " + std::to_string(id));
  return ep;
}

void InprocNetwork::route(NodeId to, std::string frame) {
  std::lock_guard lock(mu_);
  auto it = nodes_.find(to);
  if (it == nodes_.end()) throw TransportError("no such node " + std::to_string(to));
  it->second->on_frame(frame);
}

void InprocNetwork::detach(NodeId id) {
  std::lock_guard lock(mu_);
  nodes_.erase(id);
}

// ---------------------------------------------------------------------------

Address parse_address(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw InputError("expected host:port, got '" + text + "'");
  Address a;
  a.host = text.substr(0, colon);
  if (a.host.empty()) a.host = "127.0.0.1";
  const auto port = std::strtol(text.c_str() + colon + 1, nullptr, 10);
  if (port <= 0 || port > 65535) throw InputError("bad port in '" + text + "'");
  a.port = static_cast<std::uint16_t>(port);
  return a;
}

namespace {

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const auto w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("send failed: ") + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Returns bytes read; less than n only on EOF.
std::size_t read_all(int fd, char* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const auto r = ::recv(fd, data + got, n - got, 0);
    if (r == 0) break;
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("recv failed: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
  return got;
}

int connect_to(const Address& a) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto port = std::to_string(a.port);
  if (int rc = ::getaddrinfo(a.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + a.host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (int attempt = 0; attempt < 50 && fd < 0; ++attempt) {
    fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
      ::close(fd);
      fd = -1;
      std::this_thread::sleep_for(Millis(20));
    }
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot connect to " + a.host + ":" + port);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace

void write_frame(int fd, const std::string& frame) { write_all(fd, frame.data(), frame.size()); }

bool read_frame(int fd, std::string& frame) {
  char len[4];
  const auto got = read_all(fd, len, 4);
  if (got == 0) return false;
  if (got < 4) throw TransportError("connection closed inside a frame header");
  std::uint32_t body = 0;
  for (char c : len) body = (body << 8) | static_cast<unsigned char>(c);
  if (body < kFrameHeader - 4) throw WireError("frame body too short");
  frame.assign(len, 4);
  frame.resize(4 + body);
  if (read_all(fd, frame.data() + 4, body) < body) throw TransportError("connection closed inside a frame");
  return true;
}

TcpEndpoint::TcpEndpoint(NodeId id, const Address& bind) : Endpoint(id) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(bind.port);
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw TransportError("cannot listen on port " + std::to_string(bind.port) + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpEndpoint::~TcpEndpoint() { close(); }

void TcpEndpoint::set_address(NodeId node, const Address& a) {
  std::lock_guard lock(mu_);
  directory_[node] = a;
}

void TcpEndpoint::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto c = std::make_shared<Conn>();
    c->fd = fd;
    std::lock_guard lock(mu_);
    if (closed_) {
      ::close(fd);
      return;
    }
    accepted_.push_back(c);
    readers_.emplace_back([this, c] { read_loop(c); });
  }
}

void TcpEndpoint::read_loop(std::shared_ptr<Conn> c) {
  std::string frame;
  try {
    while (read_frame(c->fd, frame)) {
      Message m = decode_frame(frame);
      {
        std::lock_guard lock(mu_);
        incoming_[m.sender] = c;
      }
      deliver_local(std::move(m));
    }
  } catch (const std::exception&) {
    // Connection torn down; pending operations surface as barrier timeouts.
  }
}

std::shared_ptr<TcpEndpoint::Conn> TcpEndpoint::connection_to(NodeId to) {
  std::unique_lock lock(mu_);
  if (closed_) throw TransportError("endpoint closed");
  if (auto it = outgoing_.find(to); it != outgoing_.end()) return it->second;
  if (auto it = directory_.find(to); it != directory_.end()) {
    const Address a = it->second;
    lock.unlock();
    auto c = std::make_shared<Conn>();
    c->fd = connect_to(a);
    lock.lock();
    auto [pos, inserted] = outgoing_.emplace(to, c);
    if (!inserted) ::close(c->fd);
    return pos->second;
  }
  if (auto it = incoming_.find(to); it != incoming_.end()) return it->second;
  throw TransportError("no route to node " + std::to_string(to));
}

void TcpEndpoint::deliver(NodeId to, std::string frame) {
  auto c = connection_to(to);
  std::lock_guard lock(c->write_mu);
  write_frame(c->fd, frame);
}

void TcpEndpoint::close() {
  Endpoint::close();
  std::vector<std::thread> readers;
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    closed_ = true;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    for (auto& c : accepted_) ::shutdown(c->fd, SHUT_RDWR);
    for (auto& [id, c] : outgoing_) ::shutdown(c->fd, SHUT_RDWR);
  }
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(mu_);
    readers.swap(readers_);
  }
  for (auto& t : readers) t.join();
  std::lock_guard lock(mu_);
  for (auto& c : accepted_) ::close(c->fd);
  for (auto& [id, c] : outgoing_) ::close(c->fd);
  accepted_.clear();
  outgoing_.clear();
  incoming_.clear();
}

TcpClient::TcpClient(const Address& master) : fd_(connect_to(master)) {}

TcpClient::~TcpClient() {
  if (fd_ >= 0) ::close(fd_);
}

Message TcpClient::request(Tag tag, std::string payload, Millis timeout) {
  write_frame(fd_, encode_frame(Message{tag, kClientId, 0, std::move(payload)}));
  pollfd p{fd_, POLLIN, 0};
  const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (rc <= 0) throw TransportError("no reply from master");
  std::string frame;
  if (!read_frame(fd_, frame)) throw TransportError("master closed the connection");
  return decode_frame(frame);
}

}  // namespace phd
