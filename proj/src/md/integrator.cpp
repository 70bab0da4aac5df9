#include "mudra/md/integrator.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

namespace mudra::md {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform in (0, 1), never exactly 0.
double to_unit(std::uint64_t h) { return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53; }

bool all_finite(std::span<const Vec3> v) {
  for (const auto &p : v) {
    if (!is_finite(p)) {
      return false;
    }
  }
  return true;
}

template <class T> void put_le(std::ostream &out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), sizeof(T));
}

template <class T> T get_le(std::istream &in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char *>(bytes.data()), sizeof(T))) {
    throw CheckpointError("checkpoint truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

} // namespace

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (langevin && (!(langevin->temperature >= 0.0) || !(langevin->friction >= 0.0))) {
    throw std::invalid_argument("Langevin temperature and friction must be non-negative");
  }
}

SimulationBlowupError::SimulationBlowupError(std::uint64_t step)
    : std::runtime_error("simulation blew up at step " + std::to_string(step)), step_(step) {}

SimState make_state(std::vector<Vec3> positions) {
  SimState s;
  s.velocities.assign(positions.size(), Vec3{});
  s.forces.assign(positions.size(), Vec3{});
  s.positions = std::move(positions);
  return s;
}

double kinetic_energy(const Topology &top, std::span<const Vec3> velocities) {
  double ke = 0.0;
  for (std::size_t i = 0; i < velocities.size(); ++i) {
    ke += 0.5 * top.masses[i] * norm2(velocities[i]);
  }
  return ke;
}

Vec3 total_momentum(const Topology &top, std::span<const Vec3> velocities) {
  Vec3 p;
  for (std::size_t i = 0; i < velocities.size(); ++i) {
    p += velocities[i] * top.masses[i];
  }
  return p;
}

double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t stream) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(step ^ splitmix64(stream)));
  const double u1 = to_unit(key);
  const double u2 = to_unit(splitmix64(key));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void refresh_forces(SimState &state, const ForceField &ff, std::span<const GrabForce> grabs) {
  auto result = ff.compute(state.positions, grabs);
  state.forces = std::move(result.forces);
  state.potential_energy = result.potential_energy;
  state.kinetic_energy = kinetic_energy(ff.topology(), state.velocities);
  state.forces_current = true;
}

void step_vv(SimState &s, const ForceField &ff, std::span<const GrabForce> grabs, const IntegratorConfig &cfg) {
  const auto &masses = ff.topology().masses;
  const std::size_t n = masses.size();
  if (s.positions.size() != n || s.velocities.size() != n) {
    throw std::invalid_argument("state size does not match the topology");
  }
  if (s.step == 0 || !s.forces_current || s.forces.size() != n) {
    refresh_forces(s, ff, grabs);
  }

  const double dt = cfg.dt;
  const double half = 0.5 * dt;
  auto kick = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      s.velocities[i] += s.forces[i] * (half / masses[i]);
    }
  };
  auto drift = [&](double h) {
    for (std::size_t i = 0; i < n; ++i) {
      s.positions[i] += s.velocities[i] * h;
    }
  };

  kick();
  if (!cfg.langevin) {
    drift(dt);
  } else {
    const auto &lp = *cfg.langevin;
    const double c1 = std::exp(-lp.friction * dt);
    const double c2 = std::sqrt(lp.temperature * (1.0 - c1 * c1));
    drift(half);
    for (std::size_t i = 0; i < n; ++i) {
      const double sd = c2 / std::sqrt(masses[i]);
      const std::uint64_t base = 3 * static_cast<std::uint64_t>(i);
      auto &v = s.velocities[i];
      v.x = c1 * v.x + sd * counter_normal(lp.seed, s.step, base);
      v.y = c1 * v.y + sd * counter_normal(lp.seed, s.step, base + 1);
      v.z = c1 * v.z + sd * counter_normal(lp.seed, s.step, base + 2);
    }
    drift(half);
  }

  if (!all_finite(s.positions) || !all_finite(s.velocities)) {
    s.forces_current = false;
    throw SimulationBlowupError(s.step);
  }
  try {
    auto result = ff.compute(s.positions, grabs);
    s.forces = std::move(result.forces);
    s.potential_energy = result.potential_energy;
  } catch (const SingularGeometryError &) {
    s.forces_current = false;
    throw SimulationBlowupError(s.step);
  }
  kick();

  s.kinetic_energy = kinetic_energy(ff.topology(), s.velocities);
  s.time += dt;
  ++s.step;
  s.forces_current = true;
  if (!all_finite(s.velocities) || !all_finite(s.forces) || !std::isfinite(s.potential_energy)) {
    s.forces_current = false;
    throw SimulationBlowupError(s.step - 1);
  }
}

void write_checkpoint(std::ostream &out, const SimState &state) {
  out.write("OMGV", 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.positions.size()));
  put_le<std::uint64_t>(out, state.step);
  put_le<double>(out, state.time);
  for (const auto *arr : {&state.positions, &state.velocities}) {
    for (const auto &p : *arr) {
      put_le<double>(out, p.x);
      put_le<double>(out, p.y);
      put_le<double>(out, p.z);
    }
  }
}

SimState read_checkpoint(std::istream &in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "OMGV", 4) != 0) {
    throw CheckpointError("checkpoint magic mismatch");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto n = get_le<std::uint32_t>(in);
  SimState s;
  s.step = get_le<std::uint64_t>(in);
  s.time = get_le<double>(in);
  s.positions.resize(n);
  s.velocities.resize(n);
  s.forces.assign(n, Vec3{});
  for (auto *arr : {&s.positions, &s.velocities}) {
    for (auto &p : *arr) {
      p.x = get_le<double>(in);
      p.y = get_le<double>(in);
      p.z = get_le<double>(in);
    }
  }
  return s;
}

} // namespace mudra::md
