#include "teleop/core/event_queue.hpp"

#include <algorithm>

namespace teleop {

void EventQueue::schedule(SimTime at, Callback fn) {
  events_.push(Event{std::max(at, now_), next_order_++, std::move(fn)});
}

void EventQueue::run_until(SimTime until) {
  while (!events_.empty() && events_.top().at <= until) {
    // Copy out before popping: the callback may schedule more events.
    Event ev = events_.top();
    events_.pop();
    now_ = ev.at;
    ev.fn();
  }
  now_ = std::max(now_, until);
}

}  // namespace teleop
