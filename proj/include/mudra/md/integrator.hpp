#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mudra/geometry.hpp"
#include "mudra/md/forces.hpp"

namespace mudra::md {

struct LangevinParams {
  double temperature = 1.0;
  double friction = 1.0;
  std::uint64_t seed = 0;
};

struct IntegratorConfig {
  double dt = 0.005;
  /// Empty means plain NVE velocity Verlet.
  std::optional<LangevinParams> langevin;

  void validate() const;
};

struct SimState {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Vec3> forces;
  double potential_energy = 0.0;
  double kinetic_energy = 0.0;
  double time = 0.0;
  std::uint64_t step = 0;
  /// False whenever `forces` may not match the positions and grab set.
  bool forces_current = false;
};

class SimulationBlowupError : public std::runtime_error {
public:
  explicit SimulationBlowupError(std::uint64_t step);
  std::uint64_t step() const { return step_; }

private:
  std::uint64_t step_;
};

/// State at rest at the given positions; forces are filled on first step.
SimState make_state(std::vector<Vec3> positions);

double kinetic_energy(const Topology &top, std::span<const Vec3> velocities);
Vec3 total_momentum(const Topology &top, std::span<const Vec3> velocities);

/// Standard normal deviate keyed on (seed, step, stream). Pure function:
/// the same key always yields the same value.
double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t stream);

/// One timestep. NVE: velocity Verlet. Langevin: BAOAB splitting with the
/// O-step noise drawn from counter_normal(seed, step, 3 * atom + axis).
/// Throws SimulationBlowupError if any coordinate or velocity goes non-finite.
void step_vv(SimState &state, const ForceField &ff, std::span<const GrabForce> grabs, const IntegratorConfig &cfg);

/// Refreshes forces and energies for the current positions.
void refresh_forces(SimState &state, const ForceField &ff, std::span<const GrabForce> grabs);

// Checkpoint file: little-endian, "OMGV", u32 version, u32 n_atoms,
// u64 step, f64 time, positions then velocities as f64 triples.
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void write_checkpoint(std::ostream &out, const SimState &state);
/// Returned state has forces_current == false.
SimState read_checkpoint(std::istream &in);

} // namespace mudra::md
