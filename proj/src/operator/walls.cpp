#include "teleop/operator/walls.hpp"

#include <cmath>

namespace teleop::ops {

std::vector<std::vector<Vec2>> scan_polylines(const LaserScan& scan, const Pose2D& pose, double link_distance) {
  std::vector<std::vector<Vec2>> lines;
  std::vector<Vec2> current;
  auto flush = [&] {
    if (current.size() >= 2) lines.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double r = scan.ranges[i];
    if (!(r >= scan.range_min && r < scan.range_max)) {
      flush();
      continue;
    }
    const double a = pose.theta + scan.bearing(i);
    const Vec2 p{pose.x + r * std::cos(a), pose.y + r * std::sin(a)};
    if (!current.empty() && distance(current.back(), p) >= link_distance) flush();
    current.push_back(p);
  }
  flush();
  return lines;
}

namespace {

void rdp(const std::vector<Vec2>& pts, std::size_t lo, std::size_t hi, double tol, std::vector<bool>& keep) {
  if (hi <= lo + 1) return;
  const Segment chord{pts[lo], pts[hi]};
  double worst = -1.0;
  std::size_t idx = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = distance_to_segment(pts[i], chord);
    if (d > worst) {
      worst = d;
      idx = i;
    }
  }
  if (worst <= tol) return;
  keep[idx] = true;
  rdp(pts, lo, idx, tol, keep);
  rdp(pts, idx, hi, tol, keep);
}

}  // namespace

std::vector<Vec2> simplify_polyline(const std::vector<Vec2>& pts, double tolerance) {
  if (pts.size() <= 2) return pts;
  std::vector<bool> keep(pts.size(), false);
  keep.front() = keep.back() = true;
  rdp(pts, 0, pts.size() - 1, tolerance, keep);
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (keep[i]) out.push_back(pts[i]);
  }
  return out;
}

WallSegmentSet::Key WallSegmentSet::key_of(const Segment& s) const {
  auto q = [&](Vec2 p) { return std::pair{std::lround(p.x / params_.quantum), std::lround(p.y / params_.quantum)}; };
  auto a = q(s.a);
  auto b = q(s.b);
  if (b < a) std::swap(a, b);
  return {a, b};
}

void WallSegmentSet::ingest(const LaserScan& scan, const Pose2D& pose, double now) {
  for (const auto& line : scan_polylines(scan, pose, params_.link_distance)) {
    const auto simple = simplify_polyline(line, params_.simplify_tolerance);
    for (std::size_t i = 0; i + 1 < simple.size(); ++i) {
      const Segment s{simple[i], simple[i + 1]};
      walls_[key_of(s)] = {s, now};
    }
  }
  expire(now);
}

void WallSegmentSet::expire(double now) {
  std::erase_if(walls_, [&](const auto& kv) { return now - kv.second.last_seen > params_.expiry; });
}

std::vector<Segment> WallSegmentSet::segments() const {
  std::vector<Segment> out;
  out.reserve(walls_.size());
  for (const auto& [k, w] : walls_) out.push_back(w.segment);
  return out;
}

}  // namespace teleop::ops
