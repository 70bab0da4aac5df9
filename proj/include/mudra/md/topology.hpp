#pragma once

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mudra/geometry.hpp"

namespace mudra::md {

struct Bond {
  std::size_t i = 0;
  std::size_t j = 0;
  double r0 = 1.0;
  double k = 0.0;
  friend bool operator==(const Bond &, const Bond &) = default;
};

struct Angle {
  std::size_t i = 0;
  std::size_t j = 0; // vertex
  std::size_t k = 0;
  double theta0 = 0.0;
  double k_theta = 0.0;
  friend bool operator==(const Angle &, const Angle &) = default;
};

struct LennardJones {
  double epsilon = 1.0;
  double sigma = 1.0;
  double cutoff = 2.5;
  friend bool operator==(const LennardJones &, const LennardJones &) = default;
};

class TopologyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bead-spring force-field topology in reduced units. Exclusions hold every
/// bonded 1-2 and 1-3 pair as (min, max), sorted and unique.
struct Topology {
  std::vector<double> masses;
  std::vector<Bond> bonds;
  std::vector<Angle> angles;
  LennardJones lj;
  std::vector<std::pair<std::size_t, std::size_t>> exclusions;

  std::size_t n_atoms() const { return masses.size(); }
  bool excluded(std::size_t a, std::size_t b) const;
  /// Rebuilds `exclusions` from bonds and angles.
  void derive_exclusions();
  /// Throws TopologyError when an invariant is violated.
  void validate() const;

  friend bool operator==(const Topology &, const Topology &) = default;
};

struct ChainParams {
  double r0 = 1.0;
  double k_bond = 100.0;
  double theta0 = std::numbers::pi * 5.0 / 6.0;
  double k_theta = 5.0;
  double epsilon = 1.0;
  double sigma = 1.0;
  double cutoff = 2.5;
  double mass = 1.0;
};

inline constexpr std::size_t kDefaultChainLength = 50;

/// Linear chain: bonds (i, i+1), angles (i, i+1, i+2), uniform masses.
Topology build_chain(std::size_t n, const ChainParams &params = {});

/// Planar zigzag with every bond at r0 and every angle at theta0, centered
/// on the origin and extended along +x.
std::vector<Vec3> zigzag_chain(std::size_t n, const ChainParams &params = {});

/// Sections `[atoms]` (index mass), `[bonds]` (i j r0 k), `[angles]`
/// (i j k theta0 ktheta), `[lj]` (epsilon sigma cutoff).
Topology read_topology(std::istream &in);
Topology load_topology(const std::string &path);
void write_topology(std::ostream &out, const Topology &top);

} // namespace mudra::md
