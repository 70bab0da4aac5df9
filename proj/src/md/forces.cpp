#include "mudra/md/forces.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <omp.h>

namespace mudra::md {

namespace {

constexpr double kCoincident = 1e-12;
// Below this sin(theta) the angle gradient direction is undefined; the
// angle then contributes energy but no force.
constexpr double kStraightAngle = 1e-8;

struct PairTerm {
  double energy;
  double f_over_r; // force on the first atom is f_over_r * (x_a - x_b)
};

inline PairTerm lj_pair(double r2, double epsilon, double sigma, double shift) {
  const double s2 = sigma * sigma / r2;
  const double s6 = s2 * s2 * s2;
  const double s12 = s6 * s6;
  return {4.0 * epsilon * (s12 - s6) - shift, 24.0 * epsilon * (2.0 * s12 - s6) / r2};
}

} // namespace

SingularGeometryError::SingularGeometryError(std::size_t a, std::size_t b)
    : std::runtime_error("singular geometry: atoms " + std::to_string(a) + " and " + std::to_string(b) +
                         " coincide"),
      a_(a), b_(b) {}

ForceField::ForceField(Topology top) : top_(std::move(top)) {
  top_.validate();
  const auto n = top_.n_atoms();
  excluded_.assign(n * n, 0);
  for (const auto &[a, b] : top_.exclusions) {
    excluded_[a * n + b] = 1;
    excluded_[b * n + a] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    excluded_[i * n + i] = 1;
  }
  const auto &lj = top_.lj;
  lj_shift_ = lj_pair(lj.cutoff * lj.cutoff, lj.epsilon, lj.sigma, 0.0).energy;
}

void ForceField::check_inputs(std::span<const Vec3> positions, std::span<const GrabForce> grabs) const {
  if (positions.size() != n_atoms()) {
    throw std::invalid_argument("positions length does not match the topology");
  }
  for (const auto &g : grabs) {
    if (g.atom >= n_atoms() || !(g.stiffness > 0.0) || !(g.max_force > 0.0)) {
      throw std::invalid_argument("grab needs an in-range atom and positive stiffness and force cap");
    }
  }
}

double ForceField::add_grab_forces(std::span<const Vec3> positions, std::span<const GrabForce> grabs,
                                   std::span<Vec3> forces) {
  double energy = 0.0;
  for (const auto &g : grabs) {
    const Vec3 d = g.target - positions[g.atom];
    const double dist = norm(d);
    const double d_cap = g.max_force / g.stiffness;
    if (dist <= d_cap) {
      forces[g.atom] += d * g.stiffness;
      energy += 0.5 * g.stiffness * dist * dist;
    } else {
      // Linear beyond the cap, continuous in value and slope at d_cap.
      forces[g.atom] += d * (g.max_force / dist);
      energy += g.max_force * (dist - 0.5 * d_cap);
    }
  }
  return energy;
}

double ForceField::add_bonded(std::span<const Vec3> x, std::span<Vec3> f) const {
  double energy = 0.0;
  for (const auto &b : top_.bonds) {
    const Vec3 d = x[b.i] - x[b.j];
    const double r = norm(d);
    if (r <= kCoincident) {
      throw SingularGeometryError(b.i, b.j);
    }
    const double dr = r - b.r0;
    energy += 0.5 * b.k * dr * dr;
    const Vec3 fi = d * (-b.k * dr / r);
    f[b.i] += fi;
    f[b.j] -= fi;
  }
  for (const auto &a : top_.angles) {
    const Vec3 u = x[a.i] - x[a.j];
    const Vec3 v = x[a.k] - x[a.j];
    const double ru = norm(u);
    const double rv = norm(v);
    if (ru <= kCoincident) {
      throw SingularGeometryError(a.i, a.j);
    }
    if (rv <= kCoincident) {
      throw SingularGeometryError(a.k, a.j);
    }
    const double c = std::clamp(dot(u, v) / (ru * rv), -1.0, 1.0);
    const double theta = std::acos(c);
    const double dtheta = theta - a.theta0;
    energy += 0.5 * a.k_theta * dtheta * dtheta;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    if (s < kStraightAngle) {
      continue;
    }
    // F = -dU/dtheta * dtheta/dx, dtheta/dx = -(dcos/dx) / sin(theta)
    const double pre = a.k_theta * dtheta / s;
    const Vec3 fi = (v / (ru * rv) - u * (c / (ru * ru))) * pre;
    const Vec3 fk = (u / (ru * rv) - v * (c / (rv * rv))) * pre;
    f[a.i] += fi;
    f[a.k] += fk;
    f[a.j] -= fi + fk;
  }
  return energy;
}

ForceResult ForceField::compute_reference(std::span<const Vec3> x, std::span<const GrabForce> grabs) const {
  check_inputs(x, grabs);
  const auto n = n_atoms();
  ForceResult out;
  out.forces.assign(n, Vec3{});
  auto &f = out.forces;

  double energy = add_bonded(x, f);

  const auto &lj = top_.lj;
  const double rc2 = lj.cutoff * lj.cutoff;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (top_.excluded(i, j)) {
        continue;
      }
      const Vec3 d = x[i] - x[j];
      const double r2 = norm2(d);
      if (r2 >= rc2) {
        continue;
      }
      if (r2 <= kCoincident * kCoincident) {
        throw SingularGeometryError(i, j);
      }
      const auto t = lj_pair(r2, lj.epsilon, lj.sigma, lj_shift_);
      energy += t.energy;
      f[i] += d * t.f_over_r;
      f[j] -= d * t.f_over_r;
    }
  }

  energy += add_grab_forces(x, grabs, f);
  out.potential_energy = energy;
  return out;
}

ForceResult ForceField::compute(std::span<const Vec3> x, std::span<const GrabForce> grabs) const {
  check_inputs(x, grabs);
  const auto n = n_atoms();
  const auto &lj = top_.lj;
  const double rc2 = lj.cutoff * lj.cutoff;
  const auto ni = static_cast<std::ptrdiff_t>(n);

  std::vector<Vec3> pair_force(n);
  std::vector<double> pair_energy(n, 0.0);
  std::ptrdiff_t singular_i = -1;
  std::ptrdiff_t singular_j = -1;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < ni; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::uint8_t *row = excluded_.data() + i * n;
    Vec3 fi;
    double ei = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j]) {
        continue;
      }
      const Vec3 d = x[i] - x[j];
      const double r2 = norm2(d);
      if (r2 >= rc2) {
        continue;
      }
      if (r2 <= kCoincident * kCoincident) {
#pragma omp critical(mudra_singular)
        if (singular_i < 0) {
          singular_i = static_cast<std::ptrdiff_t>(std::min(i, j));
          singular_j = static_cast<std::ptrdiff_t>(std::max(i, j));
        }
        continue;
      }
      const auto t = lj_pair(r2, lj.epsilon, lj.sigma, lj_shift_);
      ei += 0.5 * t.energy;
      fi += d * t.f_over_r;
    }
    pair_force[i] = fi;
    pair_energy[i] = ei;
  }
  if (singular_i >= 0) {
    throw SingularGeometryError(static_cast<std::size_t>(singular_i), static_cast<std::size_t>(singular_j));
  }

  ForceResult out;
  out.forces = std::move(pair_force);
  double energy = 0.0;
  for (double e : pair_energy) {
    energy += e;
  }
  energy += add_bonded(x, out.forces);
  energy += add_grab_forces(x, grabs, out.forces);
  out.potential_energy = energy;
  return out;
}

ForceResult compute_forces(const Topology &top, std::span<const Vec3> positions, std::span<const GrabForce> grabs) {
  return ForceField(top).compute(positions, grabs);
}

} // namespace mudra::md
