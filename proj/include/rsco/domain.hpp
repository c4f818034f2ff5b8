#pragma once

#include "rsco/core.hpp"

namespace rsco {

/// Compact convex feasible set W: a Euclidean ball or an axis-aligned box.
/// Both admit an exact O(d) Euclidean projection.
class FeasibleDomain {
 public:
  enum class Kind { ball, box };

  static FeasibleDomain ball(Vector center, double radius);
  static FeasibleDomain box(Vector center, Vector half_widths);
  /// Ball centered at the origin with radius diameter/2, so sup ||w - w'|| = diameter.
  static FeasibleDomain ball_with_diameter(Eigen::Index dim, double diameter);

  Kind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return center_.size(); }
  const Vector& center() const noexcept { return center_; }
  /// Ball radius. Only meaningful for Kind::ball.
  double radius() const noexcept { return radius_; }
  /// Per-coordinate half widths. Only meaningful for Kind::box.
  const Vector& half_widths() const noexcept { return half_widths_; }

  /// 2r for a ball, the Euclidean length of the main diagonal for a box.
  double diameter() const noexcept;
  bool contains(const Vector& w, double rel_tol = 1e-12) const;
  /// argmin_{w in W} ||w - y||. Returns y unchanged (bitwise) when y is inside.
  Vector project(const Vector& y) const;
  /// max_{w in W} ||w - p||.
  double max_distance_from(const Vector& p) const;

 private:
  FeasibleDomain(Kind kind, Vector center, double radius, Vector half_widths);

  Kind kind_;
  Vector center_;
  double radius_ = 0.0;
  Vector half_widths_;
};

}  // namespace rsco
