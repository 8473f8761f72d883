#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "teleop/core/messages.hpp"

namespace teleop::net {

struct PingConfig {
  double interval = 0.1;  // s
  double timeout = 0.08;  // s, must stay below interval
  void validate() const;
};

/// Outcome of one ping: code 0 when the pong came back within the timeout,
/// 1 otherwise.
struct PingRecord {
  std::uint64_t seq = 0;
  double sent_at = 0.0;
  int code = 1;
  friend bool operator==(const PingRecord&, const PingRecord&) = default;
};

enum class LinkStatus : std::uint8_t { Good, Bad };
const char* to_string(LinkStatus s);

struct ConnectivityStatus {
  LinkStatus status = LinkStatus::Good;
  double last_change = 0.0;
  friend bool operator==(const ConnectivityStatus&, const ConnectivityStatus&) = default;
};

/// Debounced status: Bad after k consecutive code-1 records, Good after k
/// consecutive code-0 records, Good initially.
ConnectivityStatus classify_connectivity(std::span<const PingRecord> history, int k = 3);

/// Incremental form of classify_connectivity.
class ConnectivityClassifier {
 public:
  explicit ConnectivityClassifier(int k = 3);

  /// Returns true when the status flipped. `at` is the time the record was
  /// resolved and becomes last_change on a flip.
  bool update(const PingRecord& r, double at);
  const ConnectivityStatus& status() const { return status_; }
  int k() const { return k_; }

 private:
  int k_;
  ConnectivityStatus status_;
  int run_code_ = 0;
  int run_length_ = 0;
};

/// Robot-side ping sender and pong matcher. Pings go out every interval; a
/// record resolves as code 0 when its pong arrives within the timeout and as
/// code 1 once the timeout has passed without one.
class PingMonitor {
 public:
  explicit PingMonitor(PingConfig cfg = {});

  /// Sequence number of the ping to send at `now`, or nullopt if none is due.
  std::optional<std::uint64_t> due(double now);
  void on_pong(std::uint64_t seq, double arrival);
  /// Records resolved by `now`, in send order.
  std::vector<PingRecord> poll(double now);

  const PingConfig& config() const { return cfg_; }

  static json ping_payload(std::uint64_t seq) { return json{{"seq", seq}}; }
  static json pong_payload(std::uint64_t seq) { return json{{"seq", seq}, {"code", 0}}; }

 private:
  struct Outstanding {
    std::uint64_t seq;
    double sent_at;
    std::optional<double> pong_at;
  };

  PingConfig cfg_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t sent_ = 0;  // pings sent so far; the next is due at sent_ * interval
  std::vector<Outstanding> outstanding_;
};

}  // namespace teleop::net
