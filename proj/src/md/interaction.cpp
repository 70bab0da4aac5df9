#include "mudra/md/interaction.hpp"

#include <stdexcept>

namespace mudra::md {

std::size_t nearest_atom(std::span<const Vec3> positions, const Vec3 &p) {
  if (positions.empty()) {
    throw std::invalid_argument("nearest_atom needs at least one atom");
  }
  std::size_t best = 0;
  double best_d2 = norm2(positions[0] - p);
  for (std::size_t i = 1; i < positions.size(); ++i) {
    const double d2 = norm2(positions[i] - p);
    if (d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  return best;
}

Vec3 world_to_sim(const Vec3 &p_world, const Similarity &t) { return t.inverse().apply(p_world); }

Vec3 sim_to_world(const Vec3 &p_sim, const Similarity &t) { return t.apply(p_sim); }

} // namespace mudra::md
