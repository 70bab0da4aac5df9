#include <random>
#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "mudra/md/forces.hpp"
#include "mudra/md/topology.hpp"

using namespace mudra;

namespace {

// A random-walk chain packed into a small box, so most pairs are inside the cutoff.
std::vector<Vec3> compact_chain(std::size_t n) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<Vec3> x{{0, 0, 0}};
  const double box = std::cbrt(static_cast<double>(n)) * 1.2;
  while (x.size() < n) {
    Vec3 step{g(rng), g(rng), g(rng)};
    step = step / norm(step);
    Vec3 next = x.back() + step;
    for (int k = 0; k < 3; ++k) {
      if (std::abs(next[k]) > box) {
        next[k] = x.back()[k] - step[k];
      }
    }
    bool clear = true;
    for (const auto &p : x) {
      clear = clear && distance(p, next) > 0.9;
    }
    if (clear) {
      x.push_back(next);
    }
  }
  return x;
}

template <bool Parallel> void forces(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const md::ForceField ff(md::build_chain(n));
  const auto x = compact_chain(n);
  const std::vector<md::GrabForce> grabs{{0, {5, 5, 5}}};
  for (auto _ : state) {
    auto r = Parallel ? ff.compute(x, grabs) : ff.compute_reference(x, grabs);
    benchmark::DoNotOptimize(r.potential_energy);
  }
  state.counters["threads"] = Parallel ? omp_get_max_threads() : 1;
  state.SetComplexityN(state.range(0));
}

} // namespace

BENCHMARK_TEMPLATE(forces, false)->Name("forces/reference")->RangeMultiplier(2)->Range(50, 800)->Complexity();
BENCHMARK_TEMPLATE(forces, true)->Name("forces/openmp")->RangeMultiplier(2)->Range(50, 800)->Complexity();

BENCHMARK_MAIN();
