#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mudra/md/forces.hpp"
#include "mudra/md/topology.hpp"

namespace mudra::testing {

using md::GrabForce;
using md::Topology;

// Potential energy written out directly from the force-field definition,
// sharing no code with the library. Angles use atan2 rather than acos.
inline double oracle_energy(const Topology &top, const std::vector<Vec3> &x, const std::vector<GrabForce> &grabs) {
  double u = 0.0;
  for (const auto &b : top.bonds) {
    const double r = std::sqrt(std::pow(x[b.i].x - x[b.j].x, 2) + std::pow(x[b.i].y - x[b.j].y, 2) +
                               std::pow(x[b.i].z - x[b.j].z, 2));
    u += 0.5 * b.k * (r - b.r0) * (r - b.r0);
  }
  for (const auto &a : top.angles) {
    const Vec3 p = x[a.i] - x[a.j];
    const Vec3 q = x[a.k] - x[a.j];
    const double theta = std::atan2(norm(cross(p, q)), dot(p, q));
    u += 0.5 * a.k_theta * (theta - a.theta0) * (theta - a.theta0);
  }
  const auto lj = [&](double r) {
    return 4.0 * top.lj.epsilon * (std::pow(top.lj.sigma / r, 12) - std::pow(top.lj.sigma / r, 6));
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      bool skip = false;
      for (const auto &e : top.exclusions) {
        skip = skip || (e.first == i && e.second == j);
      }
      const double r = distance(x[i], x[j]);
      if (!skip && r < top.lj.cutoff) {
        u += lj(r) - lj(top.lj.cutoff);
      }
    }
  }
  for (const auto &g : grabs) {
    const double d = distance(g.target, x[g.atom]);
    const double d_cap = g.max_force / g.stiffness;
    // Piecewise: quadratic inside the cap radius, linear with slope f_max beyond.
    u += d <= d_cap ? 0.5 * g.stiffness * d * d : 0.5 * g.stiffness * d_cap * d_cap + g.max_force * (d - d_cap);
  }
  return u;
}

struct Config {
  Topology top;
  std::vector<Vec3> x;
  std::vector<GrabForce> grabs;
};

inline Config random_config(std::mt19937_64 &rng) {
  std::uniform_int_distribution<std::size_t> n_dist(2, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = n_dist(rng);
  md::ChainParams p;
  p.r0 = 0.8 + 0.4 * u(rng);
  p.k_bond = 10 + 100 * u(rng);
  p.theta0 = 1.5 + 1.5 * u(rng);
  p.k_theta = 1 + 10 * u(rng);
  p.epsilon = 0.5 + u(rng);
  Config c{md::build_chain(n, p), {}, {}};

  // Random placement with a minimum pair separation so LJ stays moderate.
  std::uniform_real_distribution<double> box(-1.6, 1.6);
  while (c.x.size() < n) {
    const Vec3 cand{box(rng), box(rng), box(rng)};
    bool ok = true;
    for (const auto &y : c.x) {
      ok = ok && distance(cand, y) > 0.85;
    }
    if (ok) {
      c.x.push_back(cand);
    }
  }
  const int n_grabs = static_cast<int>(u(rng) * 3);
  for (int g = 0; g < n_grabs; ++g) {
    GrabForce gf;
    gf.atom = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    gf.target = c.x[gf.atom] + Vec3{box(rng), box(rng), box(rng)};
    gf.stiffness = 20 + 80 * u(rng);
    gf.max_force = 5 + 30 * u(rng);
    c.grabs.push_back(gf);
  }
  return c;
}

} // namespace mudra::testing
