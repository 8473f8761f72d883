#pragma once

#include <cmath>
#include <numbers>

namespace teleop {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Segment {
  Vec2 a;
  Vec2 b;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Shortest distance from point p to the closed segment s.
double distance_to_segment(Vec2 p, const Segment& s);

/// Maps any finite angle to (-pi, pi]. Throws std::domain_error on NaN/inf.
double normalize_angle(double theta);

/// Robot pose in the map frame. theta is kept in (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Velocity command: v in m/s, w in rad/s.
struct Twist {
  double v = 0.0;
  double w = 0.0;
  friend bool operator==(const Twist&, const Twist&) = default;
};

struct VelocityLimits {
  double v_max = 0.5;
  double w_max = 1.5;
};

Twist clamp_twist(Twist t, const VelocityLimits& limits);

/// Linear interpolation in position, shortest arc in heading.
Pose2D interpolate(const Pose2D& from, const Pose2D& to, double alpha);

}  // namespace teleop
