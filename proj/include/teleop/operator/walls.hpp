#pragma once

#include <map>
#include <utility>
#include <vector>

#include "teleop/core/geometry.hpp"
#include "teleop/core/messages.hpp"

namespace teleop::ops {

struct WallParams {
  double link_distance = 0.15;  // m between consecutive endpoints
  double simplify_tolerance = 0.03;
  double expiry = 5.0;          // s without re-observation
  double quantum = 0.1;         // m, endpoint key grid
};

struct WallSegment {
  Segment segment;
  double last_seen = 0.0;
};

/// Obstacle outline built from scan endpoints, for display only.
class WallSegmentSet {
 public:
  explicit WallSegmentSet(WallParams params = {}) : params_(params) {}

  /// Adds the segments of one scan taken from `pose` and drops expired ones.
  void ingest(const LaserScan& scan, const Pose2D& pose, double now);
  void expire(double now);

  std::vector<Segment> segments() const;
  std::size_t size() const { return walls_.size(); }

 private:
  using Key = std::pair<std::pair<long, long>, std::pair<long, long>>;
  Key key_of(const Segment& s) const;

  WallParams params_;
  std::map<Key, WallSegment> walls_;
};

/// Consecutive scan endpoints linked into polylines (returns below range_max
/// only), split where neighbours are farther apart than link_distance.
std::vector<std::vector<Vec2>> scan_polylines(const LaserScan& scan, const Pose2D& pose, double link_distance);

/// Ramer-Douglas-Peucker simplification.
std::vector<Vec2> simplify_polyline(const std::vector<Vec2>& pts, double tolerance);

}  // namespace teleop::ops
