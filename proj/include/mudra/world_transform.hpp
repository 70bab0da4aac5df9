#pragma once

#include <stdexcept>

#include "mudra/geometry.hpp"

namespace mudra {

/// Minimum separation between the two pinch points of a transform gesture.
inline constexpr double kMinHandSeparation = 1e-3;

class HandsCoincidentError : public std::runtime_error {
public:
  explicit HandsCoincidentError(double separation);
  double separation() const { return separation_; }

private:
  double separation_;
};

/// Two-hand scale/rotate gesture anchored at its starting pinch points.
struct TransformSession {
  Vec3 left_start;
  Vec3 right_start;
  Similarity start_transform;
  Similarity last_transform;
  bool degraded = false;
  double min_separation = kMinHandSeparation;
};

TransformSession transform_begin(const Vec3 &left, const Vec3 &right, const Similarity &current,
                                 double min_separation = kMinHandSeparation);

/// New simulation->world transform keeping the starting anchors glued to the
/// current pinch points: uniform scale from the hand separation ratio,
/// shortest-arc rotation of the inter-hand axis (no roll), and translation of
/// the midpoint. Always composed against the session's starting transform.
/// Coincident hands leave the previous result in place and mark the session
/// degraded.
Similarity transform_update(TransformSession &session, const Vec3 &left, const Vec3 &right);

} // namespace mudra
