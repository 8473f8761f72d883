#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "teleop/core/messages.hpp"

namespace teleop {

/// Discrete-event scheduler on the virtual clock. Events at equal times run
/// in scheduling order, which keeps whole runs reproducible.
class EventQueue {
 public:
  using Callback = std::function<void()>;

  SimTime now() const { return now_; }

  /// Schedules `fn` at `at` (clamped to now if in the past).
  void schedule(SimTime at, Callback fn);

  /// Runs every event with time <= until, then advances the clock to until.
  void run_until(SimTime until);

  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }

 private:
  struct Event {
    SimTime at;
    std::uint64_t order;
    Callback fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.order > b.order;
    }
  };

  SimTime now_{0};
  std::uint64_t next_order_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
};

}  // namespace teleop
