#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mudra/geometry.hpp"

namespace mudra::knot {

class PolygonError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Closed loop; the last vertex connects back to the first.
class ClosedPolygon {
public:
  /// Throws PolygonError for fewer than 3 vertices, non-finite coordinates,
  /// or consecutive vertices closer than 1e-9.
  explicit ClosedPolygon(std::vector<Vec3> vertices);

  const std::vector<Vec3> &vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Vec3 &operator[](std::size_t i) const { return vertices_[i]; }

  friend bool operator==(const ClosedPolygon &, const ClosedPolygon &) = default;

private:
  std::vector<Vec3> vertices_;
};

inline constexpr double kDefaultClosureFactor = 10.0;

struct Closure {
  ClosedPolygon polygon;
  /// True when the fixed-offset fallback for a degenerate chain was used.
  bool perturbed = false;
};

/// Closes an open chain: each terminus is pushed radially away from the chain
/// centroid by `factor` radii of gyration and the two far points are joined.
Closure close_chain(std::span<const Vec3> chain, double factor = kDefaultClosureFactor);

/// Radius of gyration about the centroid.
double radius_of_gyration(std::span<const Vec3> points);

/// Koniaris-Muthukumar-Taylor reduction: deletes vertex i whenever no other
/// edge meets triangle (i-1, i, i+1), until no vertex can be deleted. Never
/// goes below 3 vertices.
ClosedPolygon kmt_simplify(const ClosedPolygon &poly);

/// One crossing of a planar projection; `over_edge` passes above
/// `under_edge` when viewed from +direction.
struct Crossing {
  std::size_t over_edge = 0;
  double over_param = 0.0;
  std::size_t under_edge = 0;
  double under_param = 0.0;
};

struct Diagram {
  Vec3 direction;
  std::vector<Crossing> crossings;
};

class ProjectionFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Fixed search order: +z, +y, +x, then quasi-random unit vectors.
const std::vector<Vec3> &projection_directions();

/// Crossing diagram for one projection direction; throws ProjectionFailure
/// when the projection is degenerate (crossing within 1e-9 of a vertex,
/// overlapping edges, or crossing strands at equal height).
Diagram project(const ClosedPolygon &poly, const Vec3 &direction);

/// First generic projection from projection_directions().
Diagram generic_diagram(const ClosedPolygon &poly);

/// |det| of the crossing/arc coloring matrix with one row and one column
/// deleted, i.e. |Alexander polynomial at -1|. Exact integer arithmetic.
/// Throws std::overflow_error if the value exceeds 64 bits.
std::uint64_t diagram_determinant(const Diagram &diagram);

/// Same, for an explicit coloring matrix (rows = crossings, cols = arcs).
std::uint64_t coloring_determinant(const std::vector<std::vector<std::int64_t>> &matrix);

std::uint64_t alexander_determinant(const ClosedPolygon &poly);

enum class KnotClass { Unknot, Trefoil, Other };

struct KnotReport {
  std::uint64_t determinant = 1;
  std::size_t crossings_after_reduction = 0;
  std::size_t vertices_after_reduction = 0;
  KnotClass classification = KnotClass::Unknot;
  bool closure_perturbed = false;
  /// Number of deterministic perturbations needed to find a generic projection.
  int projection_retries = 0;
};

KnotClass classify(std::uint64_t determinant, std::size_t crossings);
std::string to_string(KnotClass c);

/// Reduces, projects (perturbing deterministically on projection failure)
/// and classifies a closed polygon.
KnotReport analyze_polygon(const ClosedPolygon &poly);
/// close_chain followed by analyze_polygon.
KnotReport analyze_chain(std::span<const Vec3> chain, double factor = kDefaultClosureFactor);

/// Key-value text, one field per line.
void write_report(std::ostream &out, const KnotReport &r);

/// One vertex per line, "x y z" (commas also accepted), `#` comments.
std::vector<Vec3> read_vertices(std::istream &in);
void write_vertices(std::ostream &out, std::span<const Vec3> vertices);

} // namespace mudra::knot
