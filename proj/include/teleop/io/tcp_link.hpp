#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "teleop/netlink/link.hpp"

namespace teleop::io {

/// Cross-process link endpoint: NDJSON envelopes over one TCP connection. The
/// same LinkModel as the in-process link decides drops and delays on the
/// sending side, timed on the wall clock from construction. Runs its own I/O
/// thread; receiver callbacks are serialized on it.
class TcpLink {
 public:
  using Receiver = std::function<void(const Envelope&, double arrival)>;

  enum class Role : std::uint8_t { Listen, Connect };

  struct Options {
    Role role = Role::Listen;
    std::string host = "127.0.0.1";
    unsigned short port = 0;  // Listen: 0 picks a free port
    net::Direction outgoing = net::Direction::Uplink;
    net::LinkConfig link;
  };

  TcpLink(Options opts, Receiver receiver);
  ~TcpLink();
  TcpLink(const TcpLink&) = delete;
  TcpLink& operator=(const TcpLink&) = delete;

  /// Bound port (Listen) or the peer port (Connect).
  unsigned short port() const;
  /// Blocks until the peer is connected or the timeout passes.
  bool wait_connected(std::chrono::milliseconds timeout);

  /// Applies the fault model and queues the envelope. Thread-safe.
  net::SendOutcome send(const Envelope& e);

  /// Seconds since construction; the time base for outages.
  double now() const;
  net::LinkModel& model();
  std::uint64_t malformed() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace teleop::io
