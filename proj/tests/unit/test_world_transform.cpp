#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "mudra/world_transform.hpp"

using namespace mudra;

namespace {

void expect_near(const Vec3 &a, const Vec3 &b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

Vec3 random_vec(std::mt19937_64 &rng, double s) {
  std::uniform_real_distribution<double> u(-s, s);
  return {u(rng), u(rng), u(rng)};
}

Similarity random_similarity(std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> s(0.2, 3.0);
  return {s(rng), Rotation::from_components(g(rng), g(rng), g(rng), g(rng)), random_vec(rng, 1.0)};
}

} // namespace

TEST(TransformBegin, StoresInputs) {
  const auto s = transform_begin({0, 0, 0}, {0.4, 0, 0}, Similarity::identity());
  EXPECT_EQ(s.left_start, (Vec3{0, 0, 0}));
  EXPECT_EQ(s.right_start, (Vec3{0.4, 0, 0}));
  EXPECT_EQ(s.start_transform, Similarity::identity());
}

TEST(TransformBegin, CoincidentHands) {
  EXPECT_THROW(transform_begin({0, 0, 0}, {1e-6, 0, 0}, Similarity::identity()), HandsCoincidentError);
}

TEST(TransformUpdate, ZeroMotionKeepsTransform) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Similarity t0 = random_similarity(rng);
    const Vec3 a = random_vec(rng, 1.0);
    const Vec3 b = a + Vec3{0.3, 0.1, -0.2};
    auto s = transform_begin(a, b, t0);
    const Similarity t = transform_update(s, a, b);
    EXPECT_NEAR(t.scale, t0.scale, 1e-12);
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(t.rotation.components()[k], t0.rotation.components()[k], 1e-12);
    }
    expect_near(t.translation, t0.translation, 1e-12);
  }
}

TEST(TransformUpdate, PureScaleAboutMidpoint) {
  auto s = transform_begin({0, 0, 0}, {0.2, 0, 0}, Similarity::identity());
  const Similarity g = transform_update(s, {-0.1, 0, 0}, {0.3, 0, 0});
  EXPECT_NEAR(g.scale, 2.0, 1e-12);
  // G(x) = 2 (x - m) + m with m = (0.1, 0, 0)
  const Vec3 m{0.1, 0, 0};
  for (const Vec3 x : {Vec3{0, 0, 0}, Vec3{0.2, 0, 0}, Vec3{1, 2, 3}}) {
    expect_near(g.apply(x), (x - m) * 2.0 + m, 1e-12);
  }
  expect_near(g.apply({0, 0, 0}), {-0.1, 0, 0}, 1e-12);
  expect_near(g.apply({0.2, 0, 0}), {0.3, 0, 0}, 1e-12);
}

TEST(TransformUpdate, QuarterTurnAboutLeftHand) {
  auto s = transform_begin({0, 0, 0}, {0.2, 0, 0}, Similarity::identity());
  const Similarity g = transform_update(s, {0, 0, 0}, {0, 0.2, 0});
  EXPECT_NEAR(g.scale, 1.0, 1e-12);
  EXPECT_NEAR(g.rotation.angle(), std::numbers::pi / 2, 1e-12);
  expect_near(g.rotation.axis(), {0, 0, 1}, 1e-12);
  expect_near(g.apply({0, 0, 0}), {0, 0, 0}, 1e-9);
  expect_near(g.apply({0.2, 0, 0}), {0, 0.2, 0}, 1e-9);
}

TEST(TransformUpdate, CoincidentKeepsPreviousAndDegrades) {
  auto s = transform_begin({0, 0, 0}, {0.2, 0, 0}, Similarity::identity());
  const Similarity first = transform_update(s, {0, 0, 0}, {0.4, 0, 0});
  const Similarity stuck = transform_update(s, {0.1, 0, 0}, {0.1, 0, 0});
  EXPECT_TRUE(s.degraded);
  EXPECT_EQ(stuck, first);
  transform_update(s, {0, 0, 0}, {0.3, 0, 0});
  EXPECT_FALSE(s.degraded);
}

TEST(TransformUpdate, AnchorsFollowHandsWithoutRoll) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const Similarity t0 = random_similarity(rng);
    const Vec3 a0 = random_vec(rng, 1.0);
    const Vec3 b0 = random_vec(rng, 1.0);
    const Vec3 a = random_vec(rng, 1.0);
    const Vec3 b = random_vec(rng, 1.0);
    if (distance(a0, b0) < kMinHandSeparation || distance(a, b) < kMinHandSeparation) {
      continue;
    }
    auto s = transform_begin(a0, b0, t0);
    const Similarity t = transform_update(s, a, b);
    const Similarity inv0 = t0.inverse();
    expect_near(t.apply(inv0.apply(a0)), a, 1e-7);
    expect_near(t.apply(inv0.apply(b0)), b, 1e-7);
    EXPECT_GT(t.scale, 0.0);
    EXPECT_NEAR(t.scale, t0.scale * distance(a, b) / distance(a0, b0), 1e-9 * t.scale);

    const Rotation incremental = t.rotation * t0.rotation.inverse();
    if (incremental.angle() > 1e-6) {
      const Vec3 axis = incremental.axis();
      EXPECT_LT(std::abs(dot(axis, normalized(b0 - a0))), 1e-7);
      EXPECT_LT(std::abs(dot(axis, normalized(b - a))), 1e-7);
    }
  }
}

TEST(TransformUpdate, TwoStepAgreesWithOneStepOnAnchors) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Similarity t0 = random_similarity(rng);
    const Vec3 a0 = random_vec(rng, 1.0), b0 = a0 + random_vec(rng, 1.0) + Vec3{0.5, 0, 0};
    const Vec3 a1 = random_vec(rng, 1.0), b1 = a1 + random_vec(rng, 1.0) + Vec3{0, 0.5, 0};
    const Vec3 a2 = random_vec(rng, 1.0), b2 = a2 + random_vec(rng, 1.0) + Vec3{0, 0, 0.5};

    auto s = transform_begin(a0, b0, t0);
    const Similarity one = transform_update(s, a2, b2);

    auto s1 = transform_begin(a0, b0, t0);
    const Similarity mid = transform_update(s1, a1, b1);
    auto s2 = transform_begin(a1, b1, mid);
    const Similarity two = transform_update(s2, a2, b2);

    const Similarity inv0 = t0.inverse();
    for (const Vec3 &anchor : {a0, b0}) {
      const Vec3 pre = inv0.apply(anchor);
      expect_near(one.apply(pre), two.apply(pre), 1e-6);
    }
  }
}
