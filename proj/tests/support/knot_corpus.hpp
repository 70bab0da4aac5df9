#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mudra/geometry.hpp"

namespace mudra::testing {

// Samples t in [0, 2pi) uniformly; the curve is closed in t.
template <class F> std::vector<Vec3> sample_curve(F f, int n) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(f(2.0 * std::numbers::pi * i / n));
  }
  return out;
}

inline std::vector<Vec3> trefoil_curve(int n) {
  return sample_curve(
      [](double t) {
        return Vec3{std::sin(t) + 2 * std::sin(2 * t), std::cos(t) - 2 * std::cos(2 * t), -std::sin(3 * t)};
      },
      n);
}

// (2,3) torus knot: a second, unrelated trefoil embedding.
inline std::vector<Vec3> torus_trefoil(int n) {
  return sample_curve(
      [](double t) {
        const double r = 2 + std::cos(3 * t);
        return Vec3{r * std::cos(2 * t), r * std::sin(2 * t), -std::sin(3 * t)};
      },
      n);
}

inline std::vector<Vec3> figure_eight_curve(int n) {
  return sample_curve(
      [](double t) {
        const double r = 2 + std::cos(2 * t);
        return Vec3{r * std::cos(3 * t), r * std::sin(3 * t), std::sin(4 * t)};
      },
      n);
}

// (2,5) torus knot, 5_1.
inline std::vector<Vec3> cinquefoil_curve(int n) {
  return sample_curve(
      [](double t) {
        const double r = 2 + std::cos(5 * t);
        return Vec3{r * std::cos(2 * t), r * std::sin(2 * t), -std::sin(5 * t)};
      },
      n);
}

inline std::vector<Vec3> wobbly_circle(int n) {
  return sample_curve(
      [](double t) { return Vec3{std::cos(t), std::sin(t), 0.3 * std::sin(5 * t)}; }, n);
}

struct CorpusEntry {
  std::string name;
  std::vector<Vec3> vertices;
  std::uint64_t determinant;
};

inline std::vector<CorpusEntry> knot_corpus() {
  return {{"unknot", wobbly_circle(40), 1},
          {"trefoil", trefoil_curve(60), 3},
          {"torus_trefoil", torus_trefoil(90), 3},
          {"figure_eight", figure_eight_curve(120), 5},
          {"cinquefoil", cinquefoil_curve(150), 5}};
}

} // namespace mudra::testing
