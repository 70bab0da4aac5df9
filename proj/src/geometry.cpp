#include "mudra/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace mudra {

Rotation Rotation::from_components(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("rotation quaternion must be finite and nonzero");
  }
  // Already unit to rounding: keep the bits so text round trips are exact.
  if (std::abs(n - 1.0) <= 0x1.0p-50) {
    return raw(w, x, y, z);
  }
  return raw(w / n, x / n, y / n, z / n);
}

Rotation Rotation::from_axis_angle(const Vec3 &axis, double angle) {
  const Vec3 u = normalized(axis);
  const double s = std::sin(angle / 2.0);
  return from_components(std::cos(angle / 2.0), u.x * s, u.y * s, u.z * s);
}

Vec3 Rotation::apply(const Vec3 &v) const {
  // v' = v + 2w (q x v) + 2 q x (q x v)
  const Vec3 q{x_, y_, z_};
  const Vec3 t = 2.0 * cross(q, v);
  return v + w_ * t + cross(q, t);
}

double Rotation::angle() const {
  const double vn = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_);
  return 2.0 * std::atan2(vn, std::abs(w_));
}

Vec3 Rotation::axis() const {
  const double vn = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_);
  if (vn == 0.0) {
    return {1.0, 0.0, 0.0};
  }
  const double sign = w_ < 0.0 ? -1.0 : 1.0;
  return Vec3{x_, y_, z_} * (sign / vn);
}

Rotation operator*(const Rotation &a, const Rotation &b) {
  return Rotation::from_components(a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
                                   a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
                                   a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
                                   a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
}

Rotation shortest_arc(const Vec3 &from, const Vec3 &to) {
  const double c = dot(from, to);
  if (c < -1.0 + 1e-9) {
    const std::array<double, 3> mag{std::abs(from.x), std::abs(from.y), std::abs(from.z)};
    const auto k = std::min_element(mag.begin(), mag.end()) - mag.begin();
    Vec3 e;
    if (k == 0) {
      e.x = 1.0;
    } else if (k == 1) {
      e.y = 1.0;
    } else {
      e.z = 1.0;
    }
    const Vec3 axis = normalized(cross(from, e));
    return Rotation::from_components(0.0, axis.x, axis.y, axis.z);
  }
  // Half-angle construction: q = (1 + cos, from x to), normalized.
  const Vec3 v = cross(from, to);
  return Rotation::from_components(1.0 + c, v.x, v.y, v.z);
}

Similarity Similarity::inverse() const {
  const Rotation rinv = rotation.inverse();
  const double sinv = 1.0 / scale;
  return {sinv, rinv, rinv.apply(translation) * -sinv};
}

Vec3 similarity_apply(const Similarity &t, const Vec3 &p) { return t.apply(p); }

Similarity similarity_compose(const Similarity &a, const Similarity &b) {
  // a(b(p)) = Ra(sa (Rb(sb p) + tb)) + ta
  return {a.scale * b.scale, a.rotation * b.rotation, a.rotation.apply(b.translation * a.scale) + a.translation};
}

Similarity similarity_inverse(const Similarity &t) { return t.inverse(); }

} // namespace mudra
