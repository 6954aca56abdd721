#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "privfair/wire.hpp"

namespace privfair {

// Raised by a transport when a peer fails to deliver within the round
// timeout; the session turns it into a ProtocolAbort naming the round.
struct RecvTimeout : Error {
  u8 from;
  explicit RecvTimeout(u8 f) : Error("recv timeout"), from(f) {}
};

// Point-to-point frame delivery between named parties. Implementations
// must deliver frames from one sender in send order.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(u8 to, const WireFrame& frame) = 0;
  virtual WireFrame recv(u8 from, std::chrono::milliseconds timeout) = 0;
};

// ---------------------------------------------------------------------------
// In-process loopback: all parties share a hub of per-(recipient, sender)
// queues. Used by tests and the single-machine `simulate` mode.

class LoopbackHub {
 public:
  void post(u8 to, u8 from, WireFrame frame) {
    std::lock_guard lk(mu_);
    queues_[key(to, from)].push_back(std::move(frame));
    cv_.notify_all();
  }

  WireFrame take(u8 to, u8 from, std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu_);
    auto& q = queues_[key(to, from)];
    if (!cv_.wait_for(lk, timeout, [&] { return !q.empty(); })) {
      throw RecvTimeout(from);
    }
    WireFrame f = std::move(q.front());
    q.pop_front();
    return f;
  }

 private:
  static u32 key(u8 to, u8 from) { return (u32(to) << 8) | from; }

  std::mutex mu_;
  std::condition_variable cv_;
  std::map<u32, std::deque<WireFrame>> queues_;
};

class LoopbackTransport final : public Transport {
 public:
  LoopbackTransport(std::shared_ptr<LoopbackHub> hub, u8 own_id)
      : hub_(std::move(hub)), own_id_(own_id) {}

  void send(u8 to, const WireFrame& frame) override {
    hub_->post(to, own_id_, frame);
  }

  WireFrame recv(u8 from, std::chrono::milliseconds timeout) override {
    return hub_->take(own_id_, from, timeout);
  }

 private:
  std::shared_ptr<LoopbackHub> hub_;
  u8 own_id_;
};

// ---------------------------------------------------------------------------
// TCP transport for the multi-server deployment. Each connection starts
// with a single identifying byte; after that only PFW1 frames flow. One
// reader thread per peer drains the socket into a per-sender inbox, which
// keeps bulk-synchronous sends from deadlocking on full kernel buffers.

namespace detail {

inline void write_all(int fd, const u8* data, size_t n) {
  while (n > 0) {
    ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k <= 0) throw NetworkError("socket write failed");
    data += k;
    n -= static_cast<size_t>(k);
  }
}

inline bool read_all(int fd, u8* data, size_t n) {
  while (n > 0) {
    ssize_t k = ::recv(fd, data, n, 0);
    if (k <= 0) return false;
    data += k;
    n -= static_cast<size_t>(k);
  }
  return true;
}

struct Endpoint {
  std::string host;
  int port = 0;
};

inline Endpoint parse_endpoint(const std::string& s) {
  auto pos = s.rfind(':');
  if (pos == std::string::npos) throw ParseError("endpoint must be host:port: " + s);
  Endpoint e;
  e.host = s.substr(0, pos);
  e.port = std::atoi(s.c_str() + pos + 1);
  if (e.port <= 0 || e.port > 65535) throw ParseError("bad port in endpoint: " + s);
  return e;
}

inline in_addr_t resolve_ipv4(const std::string& host) {
  if (host.empty() || host == "0.0.0.0") return INADDR_ANY;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || !result) {
    throw NetworkError("cannot resolve host: " + host);
  }
  const in_addr_t addr =
      reinterpret_cast<sockaddr_in*>(result->ai_addr)->sin_addr.s_addr;
  ::freeaddrinfo(result);
  return addr;
}

}  // namespace detail

class SocketTransport final : public Transport {
 public:
  // Listens on `listen_addr` (if any peer is expected to dial in), dials
  // every entry of `connect_to`, and waits until all of `expect_inbound`
  // have identified themselves.
  SocketTransport(u8 own_id, const std::string& listen_addr,
                  const std::map<u8, std::string>& connect_to,
                  const std::vector<u8>& expect_inbound,
                  std::chrono::milliseconds dial_timeout = std::chrono::seconds(15)) {
    own_id_ = own_id;
    if (!expect_inbound.empty()) {
      listen_fd_ = open_listener(detail::parse_endpoint(listen_addr));
    }
    for (const auto& [peer, addr] : connect_to) {
      int fd = dial(detail::parse_endpoint(addr), dial_timeout);
      u8 hello = own_id_;
      detail::write_all(fd, &hello, 1);
      add_peer(peer, fd);
    }
    for (size_t i = 0; i < expect_inbound.size(); ++i) {
      accept_one(expect_inbound);
    }
    if (listen_fd_ >= 0) {
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
  }

  ~SocketTransport() override {
    {
      std::lock_guard lk(mu_);
      closing_ = true;
    }
    for (auto& [id, peer] : peers_) {
      ::shutdown(peer->fd, SHUT_RDWR);
    }
    for (auto& [id, peer] : peers_) {
      if (peer->reader.joinable()) peer->reader.join();
      ::close(peer->fd);
    }
  }

  void send(u8 to, const WireFrame& frame) override {
    Peer* p = find_peer(to);
    auto bytes = encode_frame(frame);
    std::lock_guard lk(p->write_mu);
    detail::write_all(p->fd, bytes.data(), bytes.size());
  }

  WireFrame recv(u8 from, std::chrono::milliseconds timeout) override {
    Peer* p = find_peer(from);
    std::unique_lock lk(mu_);
    if (!cv_.wait_for(lk, timeout, [&] { return !p->inbox.empty() || p->dead; })) {
      throw RecvTimeout(from);
    }
    if (p->inbox.empty()) throw NetworkError("peer connection lost");
    WireFrame f = std::move(p->inbox.front());
    p->inbox.pop_front();
    return f;
  }

 private:
  struct Peer {
    int fd = -1;
    std::thread reader;
    std::mutex write_mu;
    std::deque<WireFrame> inbox;
    bool dead = false;
  };

  static int open_listener(const detail::Endpoint& ep) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw NetworkError("socket() failed");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(ep.port));
    addr.sin_addr.s_addr = detail::resolve_ipv4(ep.host);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd, 16) != 0) {
      ::close(fd);
      throw NetworkError("cannot listen on " + ep.host + ":" + std::to_string(ep.port));
    }
    return fd;
  }

  static int dial(const detail::Endpoint& ep, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) throw NetworkError("socket() failed");
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_port = htons(static_cast<uint16_t>(ep.port));
      addr.sin_addr.s_addr = detail::resolve_ipv4(ep.host);
      if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return fd;
      }
      ::close(fd);
      if (std::chrono::steady_clock::now() >= deadline) {
        throw NetworkError("cannot connect to " + ep.host + ":" +
                           std::to_string(ep.port));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }

  void accept_one(const std::vector<u8>& allowed) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) throw NetworkError("accept() failed");
    u8 hello = 0;
    if (!detail::read_all(fd, &hello, 1)) {
      ::close(fd);
      throw NetworkError("peer closed before hello");
    }
    bool ok = false;
    for (u8 id : allowed) ok = ok || id == hello;
    if (!ok) {
      ::close(fd);
      throw NetworkError("unexpected peer id " + std::to_string(hello));
    }
    add_peer(hello, fd);
  }

  void add_peer(u8 id, int fd) {
    auto peer = std::make_unique<Peer>();
    peer->fd = fd;
    Peer* raw = peer.get();
    {
      std::lock_guard lk(mu_);
      peers_[id] = std::move(peer);
    }
    raw->reader = std::thread([this, raw] { reader_loop(raw); });
  }

  void reader_loop(Peer* p) {
    for (;;) {
      u8 header[kWireHeaderSize];
      if (!detail::read_all(p->fd, header, sizeof(header))) break;
      const u32 len = load_le32(header + 25);
      std::vector<u8> bytes(header, header + sizeof(header));
      bytes.resize(kWireHeaderSize + len);
      if (len > 0 && !detail::read_all(p->fd, bytes.data() + kWireHeaderSize, len)) break;
      WireFrame f = decode_frame(bytes);
      {
        std::lock_guard lk(mu_);
        if (closing_) return;
        p->inbox.push_back(std::move(f));
      }
      cv_.notify_all();
    }
    std::lock_guard lk(mu_);
    p->dead = true;
    cv_.notify_all();
  }

  Peer* find_peer(u8 id) {
    std::lock_guard lk(mu_);
    auto it = peers_.find(id);
    if (it == peers_.end()) {
      throw NetworkError("no connection to party " + std::to_string(id));
    }
    return it->second.get();
  }

  u8 own_id_ = 0;
  int listen_fd_ = -1;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<u8, std::unique_ptr<Peer>> peers_;
  bool closing_ = false;
};

}  // namespace privfair
