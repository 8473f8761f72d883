#include "teleop/core/bus.hpp"

#include <algorithm>

namespace teleop {

std::optional<Envelope> Subscription::poll() {
  if (!queue_) return std::nullopt;
  std::lock_guard lock(queue_->mutex);
  if (queue_->items.empty()) return std::nullopt;
  Envelope e = std::move(queue_->items.front());
  queue_->items.pop_front();
  return e;
}

std::vector<Envelope> Subscription::drain() {
  std::vector<Envelope> out;
  if (!queue_) return out;
  std::lock_guard lock(queue_->mutex);
  out.assign(std::make_move_iterator(queue_->items.begin()), std::make_move_iterator(queue_->items.end()));
  queue_->items.clear();
  return out;
}

std::size_t Subscription::pending() const {
  if (!queue_) return 0;
  std::lock_guard lock(queue_->mutex);
  return queue_->items.size();
}

Envelope Publisher::publish(json payload, double stamp) {
  Envelope e{topic_, 0, stamp, std::move(payload)};
  // Sequence assignment and delivery share one critical section so every
  // subscriber sees the same order.
  std::lock_guard lock(bus_->mutex_);
  e.seq = next_seq_++;
  bus_->deliver_locked(e);
  return e;
}

void Publisher::forward(const Envelope& e) {
  if (e.topic != topic_) throw UnknownTopic(e.topic);
  std::lock_guard lock(bus_->mutex_);
  bus_->deliver_locked(e);
}

Publisher TopicBus::advertise(std::string_view topic) {
  if (!topics::is_registered(topic)) throw UnknownTopic(topic);
  return Publisher(this, std::string(topic));
}

Subscription TopicBus::subscribe(std::string_view topic) {
  if (!topics::is_registered(topic)) throw UnknownTopic(topic);
  auto q = std::make_shared<Subscription::Queue>();
  std::lock_guard lock(mutex_);
  auto& subs = subscribers_[std::string(topic)];
  std::erase_if(subs, [](const auto& w) { return w.expired(); });
  subs.push_back(q);
  return Subscription(std::string(topic), std::move(q));
}

std::size_t TopicBus::subscriber_count(std::string_view topic) const {
  std::lock_guard lock(mutex_);
  auto it = subscribers_.find(topic);
  if (it == subscribers_.end()) return 0;
  return static_cast<std::size_t>(
      std::count_if(it->second.begin(), it->second.end(), [](const auto& w) { return !w.expired(); }));
}

void TopicBus::deliver_locked(const Envelope& e) {
  auto it = subscribers_.find(e.topic);
  if (it == subscribers_.end()) return;
  for (const auto& weak : it->second) {
    if (auto q = weak.lock()) {
      std::lock_guard qlock(q->mutex);
      q->items.push_back(e);
    }
  }
}

}  // namespace teleop
