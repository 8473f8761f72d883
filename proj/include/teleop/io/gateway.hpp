#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "teleop/core/messages.hpp"

namespace teleop::io {

/// WebSocket endpoint for operator UIs. A joining session first receives a
/// full snapshot, then every broadcast frame. Each session has a bounded send
/// queue; when it overflows the frame is dropped for that session only and
/// the session is resynchronized with the next snapshot. Runs its own I/O
/// thread, so publish() never blocks on a slow client.
class Gateway {
 public:
  /// Called on the I/O thread with each well-formed input message.
  using InputHandler = std::function<void(const json& message)>;

  struct Options {
    std::string address = "127.0.0.1";
    unsigned short port = 0;  // 0 picks a free port
    std::size_t max_queue = 8;
  };

  Gateway(Options opts, InputHandler on_input);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  unsigned short port() const;

  /// True when some session is waiting for a snapshot; the next publish()
  /// should then pass one.
  bool needs_snapshot() const;

  /// Broadcasts one frame. Sessions awaiting a snapshot get `snapshot`
  /// instead (when given) and join the frame stream from here on.
  void publish(std::string frame, std::optional<std::string> snapshot = std::nullopt);

  std::size_t session_count() const;
  std::uint64_t frames_dropped() const;

  struct Impl;  // opaque; defined in gateway.cpp

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace teleop::io
