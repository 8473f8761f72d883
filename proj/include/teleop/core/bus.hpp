#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/core/messages.hpp"

namespace teleop {

class UnknownTopic : public std::invalid_argument {
 public:
  explicit UnknownTopic(std::string_view topic)
      : std::invalid_argument("topic not in registry: " + std::string(topic)) {}
};

class TopicBus;

/// Receiving end of a bus subscription. Unsubscribes on destruction.
class Subscription {
 public:
  Subscription() = default;
  Subscription(Subscription&&) noexcept = default;
  Subscription& operator=(Subscription&&) noexcept = default;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription() = default;

  std::optional<Envelope> poll();
  std::vector<Envelope> drain();
  std::size_t pending() const;
  const std::string& topic() const { return topic_; }

 private:
  friend class TopicBus;
  struct Queue {
    mutable std::mutex mutex;
    std::deque<Envelope> items;
  };
  Subscription(std::string topic, std::shared_ptr<Queue> q) : topic_(std::move(topic)), queue_(std::move(q)) {}

  std::string topic_;
  std::shared_ptr<Queue> queue_;
};

/// Sending end; owns the per-(publisher, topic) sequence counter.
class Publisher {
 public:
  /// Publishes with the next sequence number. Returns the envelope as delivered.
  Envelope publish(json payload, double stamp);

  /// Re-publishes an envelope that already carries a sequence number (used by
  /// link bridges that forward remote traffic onto a local bus).
  void forward(const Envelope& e);

  const std::string& topic() const { return topic_; }
  std::uint64_t last_seq() const { return next_seq_ - 1; }

 private:
  friend class TopicBus;
  Publisher(TopicBus* bus, std::string topic) : bus_(bus), topic_(std::move(topic)) {}

  TopicBus* bus_ = nullptr;
  std::string topic_;
  std::uint64_t next_seq_ = 1;
};

/// In-process publish/subscribe over the closed topic registry. Every
/// subscriber active at publish time receives each envelope exactly once, in
/// per-topic publish order. Safe for concurrent publishers and subscribers.
class TopicBus {
 public:
  Publisher advertise(std::string_view topic);
  Subscription subscribe(std::string_view topic);

  std::size_t subscriber_count(std::string_view topic) const;

 private:
  friend class Publisher;
  void deliver_locked(const Envelope& e);

  mutable std::mutex mutex_;
  std::map<std::string, std::vector<std::weak_ptr<Subscription::Queue>>, std::less<>> subscribers_;
};

}  // namespace teleop
