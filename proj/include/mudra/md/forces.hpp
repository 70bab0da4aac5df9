#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mudra/geometry.hpp"
#include "mudra/md/topology.hpp"

namespace mudra::md {

/// Capped spring pulling one atom toward a target point in simulation space.
struct GrabForce {
  std::size_t atom = 0;
  Vec3 target;
  double stiffness = 50.0;
  double max_force = 20.0;
  friend bool operator==(const GrabForce &, const GrabForce &) = default;
};

inline constexpr double kDefaultGrabStiffness = 50.0;
inline constexpr double kDefaultGrabMaxForce = 20.0;

class SingularGeometryError : public std::runtime_error {
public:
  SingularGeometryError(std::size_t a, std::size_t b);
  std::size_t first() const { return a_; }
  std::size_t second() const { return b_; }

private:
  std::size_t a_;
  std::size_t b_;
};

struct ForceResult {
  std::vector<Vec3> forces;
  double potential_energy = 0.0;
};

/// Force field bound to one topology. `compute` runs the OpenMP kernel;
/// `compute_reference` is the plain serial loop it is tested against. The
/// parallel kernel gathers pair forces per atom in fixed order, so its
/// result does not depend on the thread count.
class ForceField {
public:
  explicit ForceField(Topology top);

  const Topology &topology() const { return top_; }
  std::size_t n_atoms() const { return top_.n_atoms(); }

  ForceResult compute(std::span<const Vec3> positions, std::span<const GrabForce> grabs = {}) const;
  ForceResult compute_reference(std::span<const Vec3> positions, std::span<const GrabForce> grabs = {}) const;

  /// Grab contribution alone; adds into `forces` and returns the energy.
  static double add_grab_forces(std::span<const Vec3> positions, std::span<const GrabForce> grabs,
                                std::span<Vec3> forces);

private:
  double add_bonded(std::span<const Vec3> positions, std::span<Vec3> forces) const;
  void check_inputs(std::span<const Vec3> positions, std::span<const GrabForce> grabs) const;

  Topology top_;
  // Dense n*n exclusion mask, row-major.
  std::vector<std::uint8_t> excluded_;
  double lj_shift_ = 0.0;
};

/// One-shot evaluation with the parallel kernel.
ForceResult compute_forces(const Topology &top, std::span<const Vec3> positions,
                           std::span<const GrabForce> grabs = {});

} // namespace mudra::md
