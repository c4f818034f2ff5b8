#include "rsco/domain.hpp"

#include <cmath>

namespace rsco {

FeasibleDomain::FeasibleDomain(Kind kind, Vector center, double radius, Vector half_widths)
    : kind_(kind), center_(std::move(center)), radius_(radius), half_widths_(std::move(half_widths)) {}

FeasibleDomain FeasibleDomain::ball(Vector center, double radius) {
  if (center.size() == 0) throw InvalidArgument("domain dimension must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be positive and finite");
  return FeasibleDomain(Kind::ball, std::move(center), radius, Vector());
}

FeasibleDomain FeasibleDomain::box(Vector center, Vector half_widths) {
  if (center.size() == 0) throw InvalidArgument("domain dimension must be positive");
  if (half_widths.size() != center.size()) throw InvalidArgument("box half widths must match the center dimension");
  if (!(half_widths.array() >= 0.0).all() || !half_widths.allFinite())
    throw InvalidArgument("box half widths must be nonnegative and finite");
  if (!(half_widths.norm() > 0.0)) throw InvalidArgument("box must have positive diameter");
  return FeasibleDomain(Kind::box, std::move(center), 0.0, std::move(half_widths));
}

FeasibleDomain FeasibleDomain::ball_with_diameter(Eigen::Index dim, double diameter) {
  if (dim <= 0) throw InvalidArgument("domain dimension must be positive");
  return ball(Vector::Zero(dim), diameter / 2.0);
}

double FeasibleDomain::diameter() const noexcept {
  return kind_ == Kind::ball ? 2.0 * radius_ : 2.0 * half_widths_.norm();
}

bool FeasibleDomain::contains(const Vector& w, double rel_tol) const {
  if (w.size() != dim()) return false;
  if (kind_ == Kind::ball) return (w - center_).norm() <= radius_ * (1.0 + rel_tol);
  const Vector slack = half_widths_.array() * (1.0 + rel_tol) + rel_tol;
  return ((w - center_).cwiseAbs().array() <= slack.array()).all();
}

Vector FeasibleDomain::project(const Vector& y) const {
  if (y.size() != dim()) throw InvalidArgument("projection input has the wrong dimension");
  if (kind_ == Kind::ball) {
    const Vector offset = y - center_;
    const double dist = offset.norm();
    if (dist <= radius_) return y;
    return center_ + (offset / dist) * radius_;
  }
  Vector out = y;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const double lo = center_[j] - half_widths_[j];
    const double hi = center_[j] + half_widths_[j];
    if (out[j] < lo) out[j] = lo;
    if (out[j] > hi) out[j] = hi;
  }
  return out;
}

double FeasibleDomain::max_distance_from(const Vector& p) const {
  if (kind_ == Kind::ball) return (p - center_).norm() + radius_;
  return ((p - center_).cwiseAbs() + half_widths_).norm();
}

}  // namespace rsco
