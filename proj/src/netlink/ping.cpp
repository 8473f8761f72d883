#include "teleop/netlink/ping.hpp"

#include <algorithm>
#include <stdexcept>

namespace teleop::net {

void PingConfig::validate() const {
  if (!(interval > 0.0)) throw std::invalid_argument("ping: interval must be positive");
  if (!(timeout > 0.0 && timeout < interval)) throw std::invalid_argument("ping: timeout must lie in (0, interval)");
}

const char* to_string(LinkStatus s) { return s == LinkStatus::Good ? "Good" : "Bad"; }

ConnectivityStatus classify_connectivity(std::span<const PingRecord> history, int k) {
  ConnectivityClassifier c(k);
  for (const auto& r : history) c.update(r, r.sent_at);
  return c.status();
}

ConnectivityClassifier::ConnectivityClassifier(int k) : k_(k) {
  if (k < 1) throw std::invalid_argument("connectivity: K must be >= 1");
}

bool ConnectivityClassifier::update(const PingRecord& r, double at) {
  if (r.code == run_code_) {
    ++run_length_;
  } else {
    run_code_ = r.code;
    run_length_ = 1;
  }
  if (run_length_ < k_) return false;
  const LinkStatus target = run_code_ == 0 ? LinkStatus::Good : LinkStatus::Bad;
  if (target == status_.status) return false;
  status_ = {target, at};
  return true;
}

PingMonitor::PingMonitor(PingConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::optional<std::uint64_t> PingMonitor::due(double now) {
  // Schedule on multiples of the interval; the tolerance absorbs clock
  // quantization of the caller's tick.
  if (now + 1e-9 < static_cast<double>(sent_) * cfg_.interval) return std::nullopt;
  ++sent_;
  const std::uint64_t seq = next_seq_++;
  outstanding_.push_back({seq, now, std::nullopt});
  return seq;
}

void PingMonitor::on_pong(std::uint64_t seq, double arrival) {
  for (auto& o : outstanding_) {
    if (o.seq == seq && !o.pong_at) o.pong_at = arrival;
  }
}

std::vector<PingRecord> PingMonitor::poll(double now) {
  std::vector<PingRecord> out;
  std::size_t resolved = 0;
  for (const auto& o : outstanding_) {
    const double deadline = o.sent_at + cfg_.timeout;
    if (o.pong_at && *o.pong_at <= deadline + 1e-9) {
      out.push_back({o.seq, o.sent_at, 0});
    } else if (now + 1e-9 >= deadline) {
      out.push_back({o.seq, o.sent_at, 1});
    } else {
      break;  // keep send order: later pings wait for this one
    }
    ++resolved;
  }
  outstanding_.erase(outstanding_.begin(), outstanding_.begin() + static_cast<std::ptrdiff_t>(resolved));
  return out;
}

}  // namespace teleop::net
