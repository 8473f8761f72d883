#include "teleop/netlink/link.hpp"

#include <algorithm>
#include <stdexcept>

namespace teleop::net {

void LinkConfig::validate() const {
  if (base_latency < 0.0 || jitter_std < 0.0) throw std::invalid_argument("link: latency and jitter must be >= 0");
  if (loss_prob < 0.0 || loss_prob > 1.0) throw std::invalid_argument("link: loss_prob must lie in [0, 1]");
  for (std::size_t i = 0; i < outages.size(); ++i) {
    if (!(outages[i].end > outages[i].start)) throw std::invalid_argument("link: empty outage interval");
    if (i > 0 && outages[i].start < outages[i - 1].end) {
      throw std::invalid_argument("link: outages must be sorted and non-overlapping");
    }
  }
}

void to_json(json& j, const LinkConfig& c) {
  json outages = json::array();
  for (const auto& o : c.outages) outages.push_back(json::array({o.start, o.end}));
  j = json{{"base_latency", c.base_latency},
           {"jitter_std", c.jitter_std},
           {"loss_prob", c.loss_prob},
           {"outages", outages},
           {"seed", c.seed}};
}

void from_json(const json& j, LinkConfig& c) {
  c = LinkConfig{};
  c.base_latency = j.value("base_latency", c.base_latency);
  c.jitter_std = j.value("jitter_std", c.jitter_std);
  c.loss_prob = j.value("loss_prob", c.loss_prob);
  c.seed = j.value("seed", c.seed);
  c.outages.clear();
  for (const auto& o : j.value("outages", json::array())) {
    c.outages.push_back({o.at(0).get<double>(), o.at(1).get<double>()});
  }
  c.validate();
}

const char* to_string(Direction d) { return d == Direction::Uplink ? "uplink" : "downlink"; }

const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::Outage:
      return "outage";
    case DropReason::Loss:
      return "loss";
    case DropReason::None:
      break;
  }
  return "none";
}

LinkModel::LinkModel(LinkConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) { cfg_.validate(); }

LinkConfig LinkModel::config() const {
  std::lock_guard lock(mutex_);
  return cfg_;
}

std::uint64_t LinkModel::delivered() const {
  std::lock_guard lock(mutex_);
  return delivered_;
}

std::uint64_t LinkModel::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

bool LinkModel::in_outage(double t) const {
  std::lock_guard lock(mutex_);
  return in_outage_locked(t);
}

bool LinkModel::in_outage_locked(double t) const {
  return std::any_of(cfg_.outages.begin(), cfg_.outages.end(), [t](const Outage& o) { return o.contains(t); });
}

void LinkModel::add_outage(double start, double end) {
  if (!(end > start)) return;
  std::lock_guard lock(mutex_);
  Outage merged{start, end};
  std::vector<Outage> kept;
  for (const auto& o : cfg_.outages) {
    if (o.end < merged.start || o.start > merged.end) {
      kept.push_back(o);
    } else {
      merged.start = std::min(merged.start, o.start);
      merged.end = std::max(merged.end, o.end);
    }
  }
  kept.push_back(merged);
  std::sort(kept.begin(), kept.end(), [](const Outage& a, const Outage& b) { return a.start < b.start; });
  cfg_.outages = std::move(kept);
}

void LinkModel::end_outage(double t) {
  std::lock_guard lock(mutex_);
  for (auto& o : cfg_.outages) {
    if (o.contains(t)) o.end = t;
  }
  std::erase_if(cfg_.outages, [](const Outage& o) { return !(o.end > o.start); });
}

SendOutcome LinkModel::send(Direction dir, double now) {
  std::lock_guard lock(mutex_);
  if (in_outage_locked(now)) {
    ++dropped_;
    return {false, DropReason::Outage, 0.0};
  }
  if (cfg_.loss_prob > 0.0 && rng_.bernoulli(cfg_.loss_prob)) {
    ++dropped_;
    return {false, DropReason::Loss, 0.0};
  }
  const double latency = std::max(0.0, cfg_.base_latency + rng_.gaussian(cfg_.jitter_std));
  auto& last = last_delivery_[static_cast<std::size_t>(dir)];
  const double at = std::max(now + latency, last);
  last = at;
  ++delivered_;
  return {true, DropReason::None, at};
}

SimLink::SimLink(EventQueue& events, LinkConfig cfg) : events_(events), model_(std::move(cfg)) {}

SendOutcome SimLink::send(Direction dir, Envelope e) {
  const double now = to_seconds(events_.now());
  if (observer_) observer_({LinkEvent::Kind::Send, now, dir, e.topic, e.seq});
  SendOutcome out = model_.send(dir, now);
  if (!out.delivered) {
    if (observer_) observer_({LinkEvent::Kind::Drop, now, dir, e.topic, e.seq, out.reason});
    return out;
  }
  // Quantize to the clock; FIFO holds because the model's delivery times are
  // non-decreasing and equal-time events run in scheduling order.
  const SimTime at = from_seconds(out.deliver_at);
  events_.schedule(at, [this, dir, env = std::move(e), at]() {
    const double arrival = to_seconds(at);
    if (observer_) observer_({LinkEvent::Kind::Deliver, arrival, dir, env.topic, env.seq});
    if (auto& r = receivers_[static_cast<std::size_t>(dir)]) r(env, arrival);
  });
  return out;
}

}  // namespace teleop::net
