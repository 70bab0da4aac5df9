#pragma once

#include <array>
#include <cmath>

namespace mudra {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 &operator+=(const Vec3 &o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3 &operator-=(const Vec3 &o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3 &operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
constexpr Vec3 operator-(const Vec3 &a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3 &a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec3 &a) { return dot(a, a); }
inline double distance(const Vec3 &a, const Vec3 &b) { return norm(a - b); }
inline Vec3 normalized(const Vec3 &a) { return a / norm(a); }
inline bool is_finite(const Vec3 &a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Unit quaternion (w, x, y, z). Every factory and composition returns a
/// renormalized value.
class Rotation {
public:
  constexpr Rotation() = default;

  /// Normalizes the given components (left untouched when already unit to
  /// within 2^-50); throws std::invalid_argument on a zero or non-finite
  /// quaternion.
  static Rotation from_components(double w, double x, double y, double z);
  static Rotation from_axis_angle(const Vec3 &axis, double angle);
  static constexpr Rotation identity() { return Rotation{}; }

  constexpr double w() const { return w_; }
  constexpr double x() const { return x_; }
  constexpr double y() const { return y_; }
  constexpr double z() const { return z_; }
  constexpr std::array<double, 4> components() const { return {w_, x_, y_, z_}; }
  double norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

  Vec3 apply(const Vec3 &v) const;
  Rotation inverse() const { return raw(w_, -x_, -y_, -z_); }

  /// Rotation angle in [0, pi].
  double angle() const;
  /// Unit rotation axis; +x for the identity.
  Vec3 axis() const;

  /// (a * b).apply(v) == a.apply(b.apply(v))
  friend Rotation operator*(const Rotation &a, const Rotation &b);
  friend constexpr bool operator==(const Rotation &, const Rotation &) = default;

private:
  static constexpr Rotation raw(double w, double x, double y, double z) {
    Rotation r;
    r.w_ = w;
    r.x_ = x;
    r.y_ = y;
    r.z_ = z;
    return r;
  }

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Minimal rotation taking unit vector `from` onto unit vector `to`. For
/// antiparallel inputs the result is the half turn about
/// normalize(from x e_k), e_k being the basis vector least aligned with
/// `from` (lowest index on ties).
Rotation shortest_arc(const Vec3 &from, const Vec3 &to);

/// Rigid pose of a tracker in world space.
struct Pose {
  Vec3 position;
  Rotation orientation;

  friend bool operator==(const Pose &, const Pose &) = default;
};

/// x -> rotation * (scale * x) + translation
struct Similarity {
  double scale = 1.0;
  Rotation rotation;
  Vec3 translation;

  static Similarity identity() { return {}; }

  Vec3 apply(const Vec3 &p) const { return rotation.apply(p * scale) + translation; }
  Similarity inverse() const;

  friend bool operator==(const Similarity &, const Similarity &) = default;
};

Vec3 similarity_apply(const Similarity &t, const Vec3 &p);
/// apply(compose(a, b), p) == apply(a, apply(b, p))
Similarity similarity_compose(const Similarity &a, const Similarity &b);
Similarity similarity_inverse(const Similarity &t);

} // namespace mudra
