#include "mudra/knot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

namespace mudra::knot {

namespace {

using boost::multiprecision::cpp_int;

constexpr double kMinEdge = 1e-9;
constexpr double kGenericTol = 1e-9;
constexpr double kKmtTol = 1e-12;

double extent(std::span<const Vec3> pts) {
  Vec3 lo = pts[0];
  Vec3 hi = pts[0];
  for (const auto &p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  return std::max(norm(hi - lo), 1e-300);
}

Vec3 centroid(std::span<const Vec3> pts) {
  Vec3 c;
  for (const auto &p : pts) {
    c += p;
  }
  return c / static_cast<double>(pts.size());
}

// Unit vector perpendicular to u built from the basis vector least aligned
// with it (lowest index on ties).
Vec3 perpendicular(const Vec3 &u) {
  const std::array<double, 3> mag{std::abs(u.x), std::abs(u.y), std::abs(u.z)};
  const auto k = std::min_element(mag.begin(), mag.end()) - mag.begin();
  const Vec3 e{k == 0 ? 1.0 : 0.0, k == 1 ? 1.0 : 0.0, k == 2 ? 1.0 : 0.0};
  return normalized(cross(u, e));
}

double triple(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &p) { return dot(cross(b - a, c - a), p - a); }

double segment_distance(const Vec3 &p0, const Vec3 &p1, const Vec3 &q0, const Vec3 &q1) {
  // Closest points between two segments (clamped parametric solve).
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = dot(d1, d1);
  const double e = dot(d2, d2);
  const double f = dot(d2, r);
  double s = 0.0;
  double t = 0.0;
  if (a <= 0.0 && e <= 0.0) {
    return norm(r);
  }
  if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return norm((p0 + d1 * s) - (q0 + d2 * t));
}

struct P2 {
  double u;
  double v;
};

double cross2(const P2 &a, const P2 &b) { return a.u * b.v - a.v * b.u; }
P2 sub2(const P2 &a, const P2 &b) { return {a.u - b.u, a.v - b.v}; }

// Closed-set 2D segment intersection with tolerance.
bool segments_touch_2d(const P2 &a, const P2 &b, const P2 &c, const P2 &d, double tol) {
  const P2 r = sub2(b, a);
  const P2 s = sub2(d, c);
  const double denom = cross2(r, s);
  const P2 ca = sub2(c, a);
  const double rn = std::hypot(r.u, r.v);
  const double sn = std::hypot(s.u, s.v);
  if (std::abs(denom) <= tol * std::max(rn * sn, 1e-300)) {
    // Parallel: touching only if collinear and overlapping.
    if (std::abs(cross2(ca, r)) > tol * std::max(rn, 1e-300) * std::max(std::hypot(ca.u, ca.v), 1.0)) {
      return false;
    }
    const double rr = std::max(r.u * r.u + r.v * r.v, 1e-300);
    const double t0 = (ca.u * r.u + ca.v * r.v) / rr;
    const double t1 = t0 + (s.u * r.u + s.v * r.v) / rr;
    return std::max(t0, t1) >= -tol && std::min(t0, t1) <= 1.0 + tol;
  }
  const double t = cross2(ca, s) / denom;
  const double u = cross2(ca, r) / denom;
  return t >= -tol && t <= 1.0 + tol && u >= -tol && u <= 1.0 + tol;
}

bool point_in_triangle_2d(const P2 &p, const P2 &a, const P2 &b, const P2 &c, double tol) {
  const double d1 = cross2(sub2(b, a), sub2(p, a));
  const double d2 = cross2(sub2(c, b), sub2(p, b));
  const double d3 = cross2(sub2(a, c), sub2(p, c));
  const bool has_neg = d1 < -tol || d2 < -tol || d3 < -tol;
  const bool has_pos = d1 > tol || d2 > tol || d3 > tol;
  return !(has_neg && has_pos);
}

// True if segment pq meets triangle abc (closed, with tolerance). `vol_tol`
// is the absolute tolerance on triple products, `tol` the relative one.
bool segment_meets_triangle(const Vec3 &p, const Vec3 &q, const Vec3 &a, const Vec3 &b, const Vec3 &c,
                            double vol_tol, double tol) {
  const double dp = triple(a, b, c, p);
  const double dq = triple(a, b, c, q);
  if ((dp > vol_tol && dq > vol_tol) || (dp < -vol_tol && dq < -vol_tol)) {
    return false;
  }
  const Vec3 n = cross(b - a, c - a);
  if (std::abs(dp) <= vol_tol && std::abs(dq) <= vol_tol) {
    // Coplanar: drop the dominant normal axis and test in 2D.
    const std::array<double, 3> an{std::abs(n.x), std::abs(n.y), std::abs(n.z)};
    const auto k = std::max_element(an.begin(), an.end()) - an.begin();
    auto to2 = [k](const Vec3 &v) {
      if (k == 0) {
        return P2{v.y, v.z};
      }
      if (k == 1) {
        return P2{v.z, v.x};
      }
      return P2{v.x, v.y};
    };
    const P2 P = to2(p), Q = to2(q), A = to2(a), B = to2(b), C = to2(c);
    const double area_tol = tol * std::max(std::abs(cross2(sub2(B, A), sub2(C, A))), 1e-300);
    if (point_in_triangle_2d(P, A, B, C, area_tol) || point_in_triangle_2d(Q, A, B, C, area_tol)) {
      return true;
    }
    return segments_touch_2d(P, Q, A, B, tol) || segments_touch_2d(P, Q, B, C, tol) ||
           segments_touch_2d(P, Q, C, A, tol);
  }
  const double t = dp / (dp - dq);
  const Vec3 x = p + (q - p) * t;
  // Barycentric inclusion with tolerance.
  const double nn = dot(n, n);
  const double wa = dot(cross(c - b, x - b), n) / nn;
  const double wb = dot(cross(a - c, x - c), n) / nn;
  const double wc = 1.0 - wa - wb;
  return wa >= -tol && wb >= -tol && wc >= -tol;
}

bool vertex_removable(const std::vector<Vec3> &v, std::size_t i, double scale) {
  const std::size_t m = v.size();
  const std::size_t prev = (i + m - 1) % m;
  const std::size_t next = (i + 1) % m;
  const Vec3 &a = v[prev];
  const Vec3 &b = v[i];
  const Vec3 &c = v[next];
  const double vol_tol = kKmtTol * scale * scale * scale;
  const Vec3 n = cross(b - a, c - a);
  const bool degenerate = norm(n) <= kKmtTol * scale * scale;

  for (std::size_t e = 0; e < m; ++e) {
    const std::size_t e1 = (e + 1) % m;
    if (e == prev || e == i) {
      continue; // the triangle's own edges
    }
    const Vec3 &p = v[e];
    const Vec3 &q = v[e1];
    const bool adjacent = (e1 == prev) || (e == next);
    if (degenerate) {
      // Zero-area triangle: blocked by anything passing near its hull.
      if (adjacent) {
        const Vec3 &far = e1 == prev ? p : q;
        const Vec3 &shared = e1 == prev ? q : p;
        if (std::abs(norm(cross(far - shared, c - a))) <= kKmtTol * scale * scale) {
          return false;
        }
        continue;
      }
      const double d = std::min({segment_distance(p, q, a, b), segment_distance(p, q, b, c)});
      if (d <= kKmtTol * scale) {
        return false;
      }
      continue;
    }
    if (adjacent) {
      // Meets the triangle at the shared vertex; blocks only when coplanar
      // and heading into the triangle's corner.
      const Vec3 &far = e1 == prev ? p : q;
      if (std::abs(triple(a, b, c, far)) <= vol_tol) {
        const Vec3 &shared = e1 == prev ? a : c;
        const Vec3 &o1 = b;
        const Vec3 &o2 = e1 == prev ? c : a;
        const Vec3 w = far - shared;
        const Vec3 u1 = o1 - shared;
        const Vec3 u2 = o2 - shared;
        const double c12 = dot(cross(u1, u2), n);
        const double c1w = dot(cross(u1, w), n);
        const double cw2 = dot(cross(w, u2), n);
        const double tol = kKmtTol * norm(w) * std::max(norm(u1), norm(u2)) * norm(n);
        if (c1w * c12 >= -tol * std::abs(c12) && cw2 * c12 >= -tol * std::abs(c12)) {
          return false;
        }
      }
      continue;
    }
    if (segment_meets_triangle(p, q, a, b, c, vol_tol, kKmtTol)) {
      return false;
    }
  }
  return true;
}

cpp_int bareiss_determinant(std::vector<std::vector<cpp_int>> a) {
  const std::size_t n = a.size();
  if (n == 0) {
    return 1;
  }
  cpp_int sign = 1;
  cpp_int prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row][k] == 0) {
        ++swap_row;
      }
      if (swap_row == n) {
        return 0;
      }
      std::swap(a[k], a[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      }
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

} // namespace

ClosedPolygon::ClosedPolygon(std::vector<Vec3> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw PolygonError("closed polygon needs at least 3 vertices");
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!is_finite(vertices_[i])) {
      throw PolygonError("vertex " + std::to_string(i) + " is not finite");
    }
    if (distance(vertices_[i], vertices_[(i + 1) % vertices_.size()]) <= kMinEdge) {
      throw PolygonError("vertices " + std::to_string(i) + " and " +
                         std::to_string((i + 1) % vertices_.size()) + " coincide");
    }
  }
}

double radius_of_gyration(std::span<const Vec3> pts) {
  const Vec3 c = centroid(pts);
  double s = 0.0;
  for (const auto &p : pts) {
    s += norm2(p - c);
  }
  return std::sqrt(s / static_cast<double>(pts.size()));
}

Closure close_chain(std::span<const Vec3> chain, double factor) {
  if (chain.size() < 3) {
    throw PolygonError("closing a chain needs at least 3 beads");
  }
  const Vec3 c = centroid(chain);
  const double reach = factor * radius_of_gyration(chain);
  const Vec3 &head = chain.front();
  const Vec3 &tail = chain.back();

  // Collinearity about the head-tail line, relative to chain size.
  const double scale = extent(chain);
  bool collinear = true;
  const Vec3 axis = tail - head;
  const double axis_len = norm(axis);
  if (axis_len <= kMinEdge * scale) {
    collinear = false;
  } else {
    const Vec3 u = axis / axis_len;
    for (const auto &p : chain) {
      const Vec3 r = p - head;
      if (norm(r - u * dot(r, u)) > kMinEdge * scale) {
        collinear = false;
        break;
      }
    }
  }

  bool perturbed = false;
  auto radial = [&](const Vec3 &end, const Vec3 &fallback) {
    const Vec3 r = end - c;
    if (norm(r) <= kMinEdge * scale) {
      perturbed = true;
      return fallback;
    }
    return normalized(r);
  };
  const Vec3 fallback = axis_len > 0.0 ? axis / axis_len : Vec3{1.0, 0.0, 0.0};
  Vec3 far_head = head + radial(head, -fallback) * reach;
  Vec3 far_tail = tail + radial(tail, fallback) * reach;

  if (collinear) {
    // A straight chain closed along its own line is a flat doubled segment;
    // lift the return path sideways by the closure reach.
    const Vec3 lift = perpendicular(axis / axis_len) * reach;
    far_head += lift;
    far_tail += lift;
    perturbed = true;
  }
  if (distance(far_head, far_tail) <= kMinEdge * std::max(scale, reach)) {
    far_tail += perpendicular(normalized(far_tail - c)) * reach;
    perturbed = true;
  }

  std::vector<Vec3> verts(chain.begin(), chain.end());
  verts.push_back(far_tail);
  verts.push_back(far_head);
  return {ClosedPolygon(std::move(verts)), perturbed};
}

ClosedPolygon kmt_simplify(const ClosedPolygon &poly) {
  std::vector<Vec3> v = poly.vertices();
  const double scale = extent(v);
  bool changed = true;
  while (changed && v.size() > 3) {
    changed = false;
    std::size_t i = 0;
    while (i < v.size() && v.size() > 3) {
      if (vertex_removable(v, i, scale)) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
      } else {
        ++i;
      }
    }
  }
  return ClosedPolygon(std::move(v));
}

const std::vector<Vec3> &projection_directions() {
  static const std::vector<Vec3> dirs = [] {
    std::vector<Vec3> d{{0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}};
    // R2 low-discrepancy sequence mapped to the sphere.
    constexpr double a1 = 0.7548776662466927;
    constexpr double a2 = 0.5698402909980532;
    for (int k = 1; k <= 61; ++k) {
      const double u = std::fmod(0.5 + a1 * k, 1.0);
      const double w = std::fmod(0.5 + a2 * k, 1.0);
      const double z = 1.0 - 2.0 * u;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = 2.0 * std::numbers::pi * w;
      d.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return d;
  }();
  return dirs;
}

Diagram project(const ClosedPolygon &poly, const Vec3 &direction) {
  const auto &v = poly.vertices();
  const std::size_t m = v.size();
  const Vec3 d = normalized(direction);
  const Vec3 e1 = perpendicular(d);
  const Vec3 e2 = cross(d, e1);
  const double scale = extent(v);

  std::vector<P2> p(m);
  std::vector<double> h(m);
  for (std::size_t i = 0; i < m; ++i) {
    p[i] = {dot(v[i], e1), dot(v[i], e2)};
    h[i] = dot(v[i], d);
  }

  Diagram out;
  out.direction = d;
  for (std::size_t a = 0; a < m; ++a) {
    const P2 &a0 = p[a];
    const P2 &a1 = p[(a + 1) % m];
    const P2 r = sub2(a1, a0);
    const double rn = std::hypot(r.u, r.v);
    if (rn <= kGenericTol * scale) {
      throw ProjectionFailure("edge projects to a point");
    }
    for (std::size_t b = a + 1; b < m; ++b) {
      const bool adjacent = (b == a + 1) || (a == 0 && b == m - 1);
      const P2 &b0 = p[b];
      const P2 &b1 = p[(b + 1) % m];
      const P2 s = sub2(b1, b0);
      const double sn = std::hypot(s.u, s.v);
      const double denom = cross2(r, s);
      const P2 ba = sub2(b0, a0);

      if (adjacent) {
        // Adjacent edges only share a vertex unless they fold back onto
        // each other in projection.
        if (std::abs(denom) <= kGenericTol * rn * sn) {
          const P2 shared = (b == a + 1) ? a1 : a0;
          const P2 ra = (b == a + 1) ? sub2(a0, shared) : sub2(a1, shared);
          const P2 rb = (b == a + 1) ? sub2(b1, shared) : sub2(b0, shared);
          if (ra.u * rb.u + ra.v * rb.v > 0.0) {
            throw ProjectionFailure("adjacent edges overlap in projection");
          }
        }
        continue;
      }
      if (std::abs(denom) <= kGenericTol * rn * sn) {
        if (segments_touch_2d(a0, a1, b0, b1, kGenericTol)) {
          throw ProjectionFailure("parallel edges overlap in projection");
        }
        continue;
      }
      const double t = cross2(ba, s) / denom;
      const double u = cross2(ba, r) / denom;
      const double tt = kGenericTol;
      if (t < -tt || t > 1.0 + tt || u < -tt || u > 1.0 + tt) {
        continue;
      }
      if (t <= tt || t >= 1.0 - tt || u <= tt || u >= 1.0 - tt) {
        throw ProjectionFailure("crossing at a vertex");
      }
      const double ha = h[a] + t * (h[(a + 1) % m] - h[a]);
      const double hb = h[b] + u * (h[(b + 1) % m] - h[b]);
      if (std::abs(ha - hb) <= kGenericTol * scale) {
        throw ProjectionFailure("strands meet in space");
      }
      if (ha > hb) {
        out.crossings.push_back({a, t, b, u});
      } else {
        out.crossings.push_back({b, u, a, t});
      }
    }
  }
  return out;
}

Diagram generic_diagram(const ClosedPolygon &poly) {
  for (const auto &d : projection_directions()) {
    try {
      return project(poly, d);
    } catch (const ProjectionFailure &) {
    }
  }
  throw ProjectionFailure("no generic projection direction found");
}

std::uint64_t coloring_determinant(const std::vector<std::vector<std::int64_t>> &matrix) {
  const std::size_t n = matrix.size();
  if (n <= 1) {
    return 1;
  }
  std::vector<std::vector<cpp_int>> minor(n - 1, std::vector<cpp_int>(n - 1));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (matrix[i].size() != n) {
      throw std::invalid_argument("coloring matrix must be square");
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
      minor[i][j] = matrix[i][j];
    }
  }
  cpp_int det = abs(bareiss_determinant(std::move(minor)));
  if (det > std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("knot determinant exceeds 64 bits");
  }
  return det.convert_to<std::uint64_t>();
}

std::uint64_t diagram_determinant(const Diagram &diagram) {
  const std::size_t n = diagram.crossings.size();
  if (n == 0) {
    return 1;
  }
  // Walk the curve; every under-pass starts a new arc.
  struct Event {
    std::size_t edge;
    double param;
    std::size_t crossing;
    bool under;
  };
  std::vector<Event> events;
  events.reserve(2 * n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto &x = diagram.crossings[c];
    events.push_back({x.over_edge, x.over_param, c, false});
    events.push_back({x.under_edge, x.under_param, c, true});
  }
  std::sort(events.begin(), events.end(), [](const Event &a, const Event &b) {
    return a.edge != b.edge ? a.edge < b.edge : a.param < b.param;
  });

  std::vector<std::size_t> over_arc(n), in_arc(n), out_arc(n);
  std::size_t arc = 0;
  for (const auto &e : events) {
    if (e.under) {
      in_arc[e.crossing] = arc;
      ++arc;
      out_arc[e.crossing] = arc;
    } else {
      over_arc[e.crossing] = arc;
    }
  }
  std::vector<std::vector<std::int64_t>> m(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t c = 0; c < n; ++c) {
    m[c][over_arc[c] % n] += 2;
    m[c][in_arc[c] % n] -= 1;
    m[c][out_arc[c] % n] -= 1;
  }
  return coloring_determinant(m);
}

std::uint64_t alexander_determinant(const ClosedPolygon &poly) {
  return diagram_determinant(generic_diagram(poly));
}

KnotClass classify(std::uint64_t determinant, std::size_t crossings) {
  if (determinant == 1 && crossings <= 2) {
    return KnotClass::Unknot;
  }
  if (determinant == 3) {
    return KnotClass::Trefoil;
  }
  return KnotClass::Other;
}

std::string to_string(KnotClass c) {
  switch (c) {
  case KnotClass::Unknot:
    return "Unknot";
  case KnotClass::Trefoil:
    return "Trefoil";
  case KnotClass::Other:
    return "Other";
  }
  return "Other";
}

KnotReport analyze_polygon(const ClosedPolygon &poly) {
  constexpr int kMaxRetries = 8;
  const double scale = extent(poly.vertices());
  KnotReport report;
  ClosedPolygon current = poly;
  for (int attempt = 0;; ++attempt) {
    const ClosedPolygon reduced = kmt_simplify(current);
    try {
      const Diagram diagram = generic_diagram(reduced);
      report.determinant = diagram_determinant(diagram);
      report.crossings_after_reduction = diagram.crossings.size();
      report.vertices_after_reduction = reduced.size();
      report.classification = classify(report.determinant, report.crossings_after_reduction);
      report.projection_retries = attempt;
      return report;
    } catch (const ProjectionFailure &) {
      if (attempt >= kMaxRetries) {
        throw;
      }
    }
    // Deterministic jitter, growing with the attempt number.
    std::vector<Vec3> jittered = poly.vertices();
    const double amp = 1e-7 * scale * static_cast<double>(attempt + 1);
    for (std::size_t i = 0; i < jittered.size(); ++i) {
      const double k = static_cast<double>(i + 1) + 0.5 * attempt;
      jittered[i] += Vec3{std::sin(12.9898 * k), std::sin(78.233 * k), std::sin(37.719 * k)} * amp;
    }
    current = ClosedPolygon(std::move(jittered));
  }
}

KnotReport analyze_chain(std::span<const Vec3> chain, double factor) {
  const auto closure = close_chain(chain, factor);
  auto report = analyze_polygon(closure.polygon);
  report.closure_perturbed = closure.perturbed;
  return report;
}

void write_report(std::ostream &out, const KnotReport &r) {
  out << "determinant = " << r.determinant << '\n';
  out << "crossings_after_reduction = " << r.crossings_after_reduction << '\n';
  out << "vertices_after_reduction = " << r.vertices_after_reduction << '\n';
  out << "classification = " << to_string(r.classification) << '\n';
  out << "closure_perturbed = " << (r.closure_perturbed ? "true" : "false") << '\n';
  out << "projection_retries = " << r.projection_retries << '\n';
}

std::vector<Vec3> read_vertices(std::istream &in) {
  std::vector<Vec3> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Vec3 p;
    std::string extra;
    if (!(ss >> p.x)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) {
        continue;
      }
      throw PolygonError("vertex line " + std::to_string(lineno) + ": expected x y z");
    }
    if (!(ss >> p.y >> p.z) || (ss >> extra) || !is_finite(p)) {
      throw PolygonError("vertex line " + std::to_string(lineno) + ": expected x y z");
    }
    out.push_back(p);
  }
  return out;
}

void write_vertices(std::ostream &out, std::span<const Vec3> vertices) {
  char buf[96];
  for (const auto &p : vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    out << buf;
  }
}

} // namespace mudra::knot
