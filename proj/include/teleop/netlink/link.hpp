#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "teleop/core/event_queue.hpp"
#include "teleop/core/messages.hpp"
#include "teleop/core/random.hpp"

namespace teleop::net {

/// Half-open outage window [start, end) in simulation seconds.
struct Outage {
  double start = 0.0;
  double end = 0.0;
  bool contains(double t) const { return t >= start && t < end; }
  friend bool operator==(const Outage&, const Outage&) = default;
};

struct LinkConfig {
  double base_latency = 0.02;  // s
  double jitter_std = 0.005;   // s
  double loss_prob = 0.0;
  std::vector<Outage> outages;  // sorted, non-overlapping
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on negative values, loss outside [0, 1],
  /// or unsorted/overlapping outages.
  void validate() const;
};

void to_json(json& j, const LinkConfig& c);
void from_json(const json& j, LinkConfig& c);

enum class Direction : std::uint8_t { Uplink = 0, Downlink = 1 };  // robot->operator, operator->robot
const char* to_string(Direction d);

enum class DropReason : std::uint8_t { None, Outage, Loss };
const char* to_string(DropReason r);

struct SendOutcome {
  bool delivered = false;
  DropReason reason = DropReason::None;
  double deliver_at = 0.0;  // s, valid when delivered
};

/// Fault model of the wireless hop. Decides, per envelope, whether it is
/// dropped and when it arrives. Draws come only from the seeded generator,
/// and per-direction delivery times never decrease, which preserves FIFO.
/// Both endpoints may send concurrently.
class LinkModel {
 public:
  explicit LinkModel(LinkConfig cfg);

  SendOutcome send(Direction dir, double now);

  bool in_outage(double t) const;
  /// Adds [start, end), merging with any overlapping window.
  void add_outage(double start, double end);
  /// Ends whatever outage covers `t` at `t`.
  void end_outage(double t);

  LinkConfig config() const;
  std::uint64_t delivered() const;
  std::uint64_t dropped() const;

 private:
  bool in_outage_locked(double t) const;

  mutable std::mutex mutex_;
  LinkConfig cfg_;
  Rng rng_;
  std::array<double, 2> last_delivery_{0.0, 0.0};
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
};

/// Link events, consumed by the run trace.
struct LinkEvent {
  enum class Kind { Send, Drop, Deliver } kind;
  double t;
  Direction dir;
  std::string topic;
  std::uint64_t seq;
  DropReason reason = DropReason::None;
};

/// LinkModel bound to the virtual clock: delivered envelopes are handed to the
/// receiver of their direction at their arrival time.
class SimLink {
 public:
  using Receiver = std::function<void(const Envelope&, double arrival)>;
  using Observer = std::function<void(const LinkEvent&)>;

  SimLink(EventQueue& events, LinkConfig cfg);

  void set_receiver(Direction dir, Receiver r) { receivers_[static_cast<std::size_t>(dir)] = std::move(r); }
  void set_observer(Observer o) { observer_ = std::move(o); }

  SendOutcome send(Direction dir, Envelope e);

  LinkModel& model() { return model_; }
  const LinkModel& model() const { return model_; }

 private:
  EventQueue& events_;
  LinkModel model_;
  std::array<Receiver, 2> receivers_;
  Observer observer_;
};

}  // namespace teleop::net
