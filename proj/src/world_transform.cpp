#include "mudra/world_transform.hpp"

#include <string>

namespace mudra {

HandsCoincidentError::HandsCoincidentError(double separation)
    : std::runtime_error("hands coincident: separation " + std::to_string(separation) + " m"),
      separation_(separation) {}

TransformSession transform_begin(const Vec3 &left, const Vec3 &right, const Similarity &current,
                                 double min_separation) {
  const double sep = distance(left, right);
  if (!(sep >= min_separation)) {
    throw HandsCoincidentError(sep);
  }
  return {left, right, current, current, false, min_separation};
}

Similarity transform_update(TransformSession &s, const Vec3 &left, const Vec3 &right) {
  const Vec3 d = right - left;
  const double len = norm(d);
  if (!(len >= s.min_separation)) {
    s.degraded = true;
    return s.last_transform;
  }
  s.degraded = false;

  const Vec3 d0 = s.right_start - s.left_start;
  const double len0 = norm(d0);
  const Vec3 m0 = (s.left_start + s.right_start) * 0.5;
  const Vec3 m = (left + right) * 0.5;

  Similarity g;
  g.scale = len / len0;
  g.rotation = shortest_arc(d0 / len0, d / len);
  g.translation = m - g.rotation.apply(m0 * g.scale);

  s.last_transform = similarity_compose(g, s.start_transform);
  return s.last_transform;
}

} // namespace mudra
