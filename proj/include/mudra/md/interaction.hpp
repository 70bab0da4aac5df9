#pragma once

#include <cstddef>
#include <span>

#include "mudra/geometry.hpp"

namespace mudra::md {

/// Index of the atom closest to `p`; the lowest index wins ties.
/// Requires at least one atom.
std::size_t nearest_atom(std::span<const Vec3> positions, const Vec3 &p);

/// Maps a world-space point into simulation space under the
/// simulation->world transform `t`.
Vec3 world_to_sim(const Vec3 &p_world, const Similarity &t);
Vec3 sim_to_world(const Vec3 &p_sim, const Similarity &t);

} // namespace mudra::md
