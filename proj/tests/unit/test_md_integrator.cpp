#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mudra/md/integrator.hpp"
#include "mudra/md/interaction.hpp"

using namespace mudra;
using namespace mudra::md;

namespace {

Topology dimer(double k = 100.0) {
  ChainParams p;
  p.k_bond = k;
  return build_chain(2, p);
}

double total_energy(const SimState &s) { return s.potential_energy + s.kinetic_energy; }

// Maxwell velocities at temperature t with the centre-of-mass drift removed.
void thermalize(SimState &s, const Topology &top, double t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < s.velocities.size(); ++i) {
    const double sd = std::sqrt(t / top.masses[i]);
    s.velocities[i] = {sd * g(rng), sd * g(rng), sd * g(rng)};
  }
  double m = 0.0;
  for (double mi : top.masses) {
    m += mi;
  }
  const Vec3 drift = total_momentum(top, s.velocities) / m;
  for (auto &v : s.velocities) {
    v -= drift;
  }
}

// Largest |E(t) - E(0)| over `steps` steps of a stretched dimer.
double dimer_energy_error(double dt, int steps) {
  const Topology top = dimer();
  const ForceField ff(top);
  SimState s = make_state({{0, 0, 0}, {1.1, 0, 0}});
  refresh_forces(s, ff, {});
  const double e0 = total_energy(s);
  double worst = 0.0;
  IntegratorConfig cfg;
  cfg.dt = dt;
  for (int i = 0; i < steps; ++i) {
    step_vv(s, ff, {}, cfg);
    worst = std::max(worst, std::abs(total_energy(s) - e0));
  }
  return worst;
}

} // namespace

TEST(Integrator, FreeParticle) {
  Topology top;
  top.masses = {2.0};
  const ForceField ff(top);
  SimState s = make_state({{1, 2, 3}});
  s.velocities[0] = {0.5, -1, 2};
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  step_vv(s, ff, {}, cfg);
  EXPECT_EQ(s.positions[0], (Vec3{1 + 0.5 * 0.01, 2 - 0.01, 3 + 2 * 0.01}));
  EXPECT_EQ(s.velocities[0], (Vec3{0.5, -1, 2}));
  EXPECT_EQ(s.step, 1u);
  EXPECT_DOUBLE_EQ(s.time, 0.01);
}

TEST(Integrator, HarmonicDimerFollowsAnalyticSolution) {
  // Relative coordinate oscillates as r0 + a cos(w t), w = sqrt(k / mu), mu = 1/2.
  const Topology top = dimer();
  const ForceField ff(top);
  SimState s = make_state({{0, 0, 0}, {1.1, 0, 0}});
  IntegratorConfig cfg;
  cfg.dt = 1e-4;
  const double w = std::sqrt(100.0 / 0.5);
  for (int i = 0; i < 5000; ++i) {
    step_vv(s, ff, {}, cfg);
  }
  const double r = distance(s.positions[0], s.positions[1]);
  EXPECT_NEAR(r, 1.0 + 0.1 * std::cos(w * s.time), 1e-5);
}

TEST(Integrator, EnergyErrorIsSecondOrderInDt) {
  const double coarse = dimer_energy_error(0.004, 2000);
  const double fine = dimer_energy_error(0.002, 4000);
  const double ratio = coarse / fine;
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Integrator, HarmonicDimerLongRunDrift) {
  // dt = 0.002 is about 1/220 of the dimer period; the convergence study
  // above shows the error scaling.
  const Topology top = dimer();
  const ForceField ff(top);
  SimState s = make_state({{0, 0, 0}, {1.1, 0, 0}});
  refresh_forces(s, ff, {});
  const double e0 = total_energy(s);
  IntegratorConfig cfg;
  cfg.dt = 0.002;
  for (int i = 0; i < 100000; ++i) {
    step_vv(s, ff, {}, cfg);
  }
  EXPECT_LT(std::abs(total_energy(s) - e0) / e0, 1e-3);
}

TEST(Integrator, ChainConservesMomentumAndEnergy) {
  const Topology top = build_chain(kDefaultChainLength);
  const ForceField ff(top);
  SimState s = make_state(zigzag_chain(kDefaultChainLength));
  thermalize(s, top, 0.5, 11);
  refresh_forces(s, ff, {});
  const double e0 = total_energy(s);
  const Vec3 p0 = total_momentum(top, s.velocities);
  IntegratorConfig cfg;
  cfg.dt = 0.002;
  for (int i = 0; i < 5000; ++i) {
    const Vec3 before = total_momentum(top, s.velocities);
    step_vv(s, ff, {}, cfg);
    ASSERT_LT(norm(total_momentum(top, s.velocities) - before), 1e-9);
  }
  EXPECT_LT(norm(total_momentum(top, s.velocities) - p0), 1e-9);
  EXPECT_LT(std::abs(total_energy(s) - e0) / std::abs(e0), 1e-3);
}

TEST(Integrator, LangevinEquipartition) {
  const Topology top = dimer();
  const ForceField ff(top);
  SimState s = make_state({{0, 0, 0}, {1, 0, 0}});
  IntegratorConfig cfg;
  cfg.dt = 0.005;
  cfg.langevin = LangevinParams{1.5, 1.0, 99};
  double sum = 0.0;
  const int burn = 10000;
  const int steps = 1000000;
  for (int i = 0; i < burn + steps; ++i) {
    step_vv(s, ff, {}, cfg);
    if (i >= burn) {
      sum += s.kinetic_energy;
    }
  }
  const double per_dof = sum / steps / 6.0;
  EXPECT_NEAR(per_dof, 0.75, 0.05 * 0.75);
}

TEST(Integrator, CounterNormalIsPureAndStandard) {
  EXPECT_EQ(counter_normal(1, 2, 3), counter_normal(1, 2, 3));
  EXPECT_NE(counter_normal(1, 2, 3), counter_normal(1, 2, 4));
  EXPECT_NE(counter_normal(1, 2, 3), counter_normal(2, 2, 3));
  double m = 0.0, m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = counter_normal(5, static_cast<std::uint64_t>(i), 0);
    m += z;
    m2 += z * z;
  }
  m /= n;
  EXPECT_NEAR(m, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2 / n - m * m, 1.0, 0.02);
}

TEST(Integrator, DeterministicTrajectories) {
  const Topology top = build_chain(20);
  const ForceField ff(top);
  IntegratorConfig cfg;
  cfg.langevin = LangevinParams{1.0, 1.0, 7};
  const std::vector<GrabForce> grabs{{0, {5, 5, 0}}};
  auto run = [&] {
    SimState s = make_state(zigzag_chain(20));
    for (int i = 0; i < 500; ++i) {
      step_vv(s, ff, grabs, cfg);
    }
    return s;
  };
  const SimState a = run();
  const SimState b = run();
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.velocities, b.velocities);

  cfg.langevin->seed = 8;
  EXPECT_NE(run().positions, a.positions);
}

TEST(Integrator, GrabPullsAtomToTarget) {
  const Topology top = build_chain(kDefaultChainLength);
  const ForceField ff(top);
  IntegratorConfig cfg;
  cfg.langevin = LangevinParams{1.0, 1.0, 3};
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 6; ++trial) {
    SimState s = make_state(zigzag_chain(kDefaultChainLength));
    const std::size_t atom = trial % 2 == 0 ? 0 : 25;
    const Vec3 dir = normalized(Vec3{g(rng), g(rng), g(rng)});
    const Vec3 target = s.positions[atom] + dir * 10.0;
    const std::vector<GrabForce> grabs{{atom, target, kDefaultGrabStiffness, kDefaultGrabMaxForce}};
    int k = 0;
    for (; k < 5000 && distance(s.positions[atom], target) >= 2.0; ++k) {
      step_vv(s, ff, grabs, cfg);
    }
    EXPECT_LT(k, 5000) << "trial " << trial;
  }
}

TEST(Integrator, BlowupIsReported) {
  const Topology top = build_chain(3);
  const ForceField ff(top);
  SimState s = make_state({{0, 0, 0}, {1, 0, 0}, {2, 0.5, 0}});
  s.velocities[1] = {std::numeric_limits<double>::infinity(), 0, 0};
  EXPECT_THROW(step_vv(s, ff, {}, {}), SimulationBlowupError);
  EXPECT_FALSE(s.forces_current);
}

TEST(Integrator, RejectsBadConfig) {
  IntegratorConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.dt = 0.01;
  cfg.langevin = LangevinParams{-1.0, 1.0, 0};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsExact) {
  SimState s = make_state(zigzag_chain(7));
  thermalize(s, build_chain(7), 1.0, 4);
  s.step = 1234567;
  s.time = 6.172835;
  std::stringstream ss;
  write_checkpoint(ss, s);
  EXPECT_EQ(ss.str().size(), 4u + 4 + 4 + 8 + 8 + 2 * 7 * 3 * 8);
  EXPECT_EQ(ss.str().substr(0, 4), "OMGV");
  const SimState back = read_checkpoint(ss);
  EXPECT_EQ(back.positions, s.positions);
  EXPECT_EQ(back.velocities, s.velocities);
  EXPECT_EQ(back.step, s.step);
  EXPECT_EQ(back.time, s.time);
  EXPECT_FALSE(back.forces_current);
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::istringstream wrong_magic("NOPE");
  EXPECT_THROW(read_checkpoint(wrong_magic), CheckpointError);
  SimState s = make_state(zigzag_chain(3));
  std::stringstream ss;
  write_checkpoint(ss, s);
  std::istringstream truncated(ss.str().substr(0, ss.str().size() - 5));
  EXPECT_THROW(read_checkpoint(truncated), CheckpointError);
}

TEST(Interaction, NearestAtom) {
  const std::vector<Vec3> pos{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  EXPECT_EQ(nearest_atom(pos, {0.9, 0.1, 0}), 1u);
  EXPECT_EQ(nearest_atom(pos, {0.5, 0, 0}), 0u); // tie goes to the lower index
  EXPECT_THROW(nearest_atom({}, {0, 0, 0}), std::invalid_argument);
}

TEST(Interaction, WorldSimRoundTrip) {
  const Similarity t{0.05, Rotation::from_axis_angle({0, 1, 0}, 0.7), {1, 1.5, -2}};
  const Vec3 p{0.3, 1.2, -1.9};
  const Vec3 back = sim_to_world(world_to_sim(p, t), t);
  EXPECT_NEAR(distance(back, p), 0.0, 1e-12);
  EXPECT_EQ(world_to_sim(p, Similarity::identity()), p);
}
