// Authors the reference knotting plan by running the simulation in-process
// and recording the two-hand waypoints: one hand lays the chain along an open
// trefoil a few beads at a time while the other keeps the head lifted clear,
// then both pull the ends apart.
//
// The plan only works against a server configured exactly like the session
// built here (see PlanSetup); the plan file header records the settings.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mudra/harness/plan.hpp"
#include "mudra/knot.hpp"
#include "mudra/net/session.hpp"

using namespace mudra;

namespace {

struct Author {
  net::SimulationSession session;
  std::vector<harness::Waypoint> wps;
  harness::Waypoint current;
  std::uint64_t frame = 0;
  int rate;
  std::optional<std::uint64_t> first_trefoil;

  Author(net::SimulationSession s, int r) : session(std::move(s)), rate(r) {
    current.t_ms = 0;
    wps.push_back(current);
  }

  const std::vector<Vec3> &positions() const { return session.state().positions; }

  // Simulates frames up to the newest waypoint.
  void run_to(std::int64_t t_ms) {
    const harness::AgentPlan plan(wps);
    while (harness::frame_time_ms(frame, rate) <= t_ms) {
      const auto in = plan.at(harness::frame_time_ms(frame, rate));
      session.tick({in[0], in[1]});
      ++frame;
      if (!first_trefoil && frame % static_cast<std::uint64_t>(rate) == 0 &&
          knot::analyze_chain(positions()).classification == knot::KnotClass::Trefoil) {
        first_trefoil = frame;
      }
    }
  }

  // Appends a waypoint `dt` ms after the last one and simulates to it.
  void move(std::int64_t dt, const std::function<void(harness::Waypoint &)> &edit) {
    current.t_ms += dt;
    edit(current);
    wps.push_back(current);
    run_to(current.t_ms);
  }

  void hold(std::int64_t dt) {
    move(dt, [](harness::Waypoint &) {});
  }

  // Holds still until `atom` is within `tol` of `where`, or `max_ms` passes.
  void settle(std::size_t atom, const Vec3 &where, double tol, std::int64_t max_ms) {
    for (std::int64_t waited = 0; waited < max_ms && distance(positions()[atom], where) > tol; waited += 200) {
      hold(200);
    }
  }
};

// Arc-length resampling of the open trefoil (sin t + 2 sin 2t, cos t - 2 cos 2t, -h sin 3t)
// for t in [t0 + gap, t0 + 2 pi - gap], scaled to total length n - 1.
std::vector<Vec3> trefoil_targets(std::size_t n, double h, double gap) {
  const double t0 = std::numbers::pi / 3;
  const int fine = 20000;
  std::vector<Vec3> pts;
  std::vector<double> arc{0.0};
  for (int i = 0; i <= fine; ++i) {
    const double t = t0 + gap + (2 * std::numbers::pi - 2 * gap) * i / fine;
    pts.push_back({std::sin(t) + 2 * std::sin(2 * t), std::cos(t) - 2 * std::cos(2 * t), -h * std::sin(3 * t)});
    if (i > 0) {
      arc.push_back(arc.back() + distance(pts[i], pts[i - 1]));
    }
  }
  const double scale = static_cast<double>(n - 1) / arc.back();
  std::vector<Vec3> out;
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = static_cast<double>(j) / scale;
    while (k + 1 < arc.size() && arc[k + 1] < s) {
      ++k;
    }
    const double u = k + 1 < arc.size() ? (s - arc[k]) / (arc[k + 1] - arc[k]) : 0.0;
    const Vec3 p = k + 1 < pts.size() ? pts[k] + (pts[k + 1] - pts[k]) * u : pts.back();
    out.push_back(p * scale);
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Author the reference knotting plan"};
  std::string out_path;
  double temperature = 1.0;
  double gamma = 1.0;
  std::uint64_t seed = 1;
  double height = 2.0;
  double gap = 0.25;
  int stride = 3;
  int move_ms = 1500;
  double pull = 20.0;
  double settle_tol = 0.3;
  double lift_ratio = 0.6;
  app.add_option("-o,--out", out_path, "Plan file to write")->required();
  app.add_option("--temp", temperature);
  app.add_option("--gamma", gamma);
  app.add_option("--seed", seed);
  app.add_option("--height", height, "Vertical stretch of the trefoil template");
  app.add_option("--gap", gap, "Parameter gap between the two termini");
  app.add_option("--stride", stride, "Beads laid per inchworm step");
  app.add_option("--move-ms", move_ms, "Duration of each laying move");
  app.add_option("--pull", pull, "Final distance each end is pulled outward");
  app.add_option("--settle", settle_tol, "Distance a dragged bead must reach before the hands swap");
  app.add_option("--lift", lift_ratio, "Height of the lifted head per unlaid bead");
  CLI11_PARSE(app, argc, argv);

  const std::size_t n = md::kDefaultChainLength;
  net::SessionConfig cfg;
  cfg.integrator.langevin = md::LangevinParams{temperature, gamma, seed};
  net::SimulationSession session(md::build_chain(n), md::zigzag_chain(n), cfg);
  Author a(std::move(session), cfg.frame_rate);

  const auto target = trefoil_targets(n, height, gap);
  {
    const auto r = knot::analyze_chain(target);
    std::fprintf(stderr, "template: det=%llu %s\n", static_cast<unsigned long long>(r.determinant),
                 knot::to_string(r.classification).c_str());
    for (std::size_t j = 0; j + 1 < n; ++j) {
      if (j % 10 == 0) std::fprintf(stderr, "  bond %zu len %.3f\n", j, distance(target[j], target[j + 1]));
    }
  }
  constexpr int L = 0;
  constexpr int R = 1;
  const auto report = [&](const char *what) {
    const auto r = knot::analyze_chain(a.positions());
    std::fprintf(stderr, "frame %6llu  %-28s det=%llu crossings=%zu %s\n", static_cast<unsigned long long>(a.frame),
                 what, static_cast<unsigned long long>(r.determinant), r.crossings_after_reduction,
                 knot::to_string(r.classification).c_str());
    return r;
  };

  // The right hand keeps the head lifted above the laying front so the
  // unlaid part of the chain hangs clear of the knot; the left hand lays
  // the chain along the template from the tail towards the head.
  const Vec3 up{0.0, 0.0, 1.0};
  const auto lift = [&](std::size_t front) {
    return front == 0 ? target[0] : target[front] + up * (lift_ratio * static_cast<double>(front));
  };
  a.move(300, [&](auto &w) { w.position[R] = a.positions()[0]; });
  a.move(100, [&](auto &w) { w.index[R] = true; });
  a.move(move_ms * 3, [&](auto &w) { w.position[R] = a.positions()[0] + up * 30.0; });
  a.settle(0, a.wps.back().position[R], 1.0, 20000);

  std::size_t held = n - 1;
  a.move(300, [&](auto &w) { w.position[L] = a.positions()[held]; });
  a.move(100, [&](auto &w) { w.index[L] = true; });
  a.move(move_ms * 3, [&](auto &w) {
    w.position[L] = target[held];
    w.position[R] = lift(held);
  });
  a.settle(held, target[held], settle_tol, 20000);
  a.move(100, [&](auto &w) { w.index[L] = false; });

  while (held > 0) {
    const std::size_t next = held >= static_cast<std::size_t>(stride) ? held - stride : 0;
    a.move(300, [&](auto &w) { w.position[L] = a.positions()[next]; });
    a.move(100, [&](auto &w) { w.index[L] = true; });
    a.move(move_ms, [&](auto &w) {
      w.position[L] = target[next];
      w.position[R] = lift(next);
    });
    a.settle(next, target[next], settle_tol, 20000);
    if (next > 0) {
      a.move(100, [&](auto &w) { w.index[L] = false; });
    }
    held = next;
    double dev = 0.0;
    for (std::size_t j = held; j < n; ++j) {
      dev = std::max(dev, distance(a.positions()[j], target[j]));
    }
    char label[96];
    std::snprintf(label, sizeof label, "laid to bead %zu dev %.2f", held, dev);
    report(label);
  }
  // Both hands are on the head now; the right hand lets go.
  a.move(100, [&](auto &w) { w.index[R] = false; });
  a.move(100, [&](auto &w) { w.position[R] = a.positions()[0]; });

  // Right hand holds the head; left hand takes the tail and both pull apart.
  a.move(100, [&](auto &w) { w.index[L] = false; });
  a.move(300, [&](auto &w) { w.position[L] = a.positions()[n - 1]; });
  a.move(100, [&](auto &w) {
    w.index[L] = true;
    w.index[R] = true;
  });
  const Vec3 head = a.positions()[0];
  const Vec3 tail = a.positions()[n - 1];
  const Vec3 dir = normalized(head - tail);
  a.move(4000, [&](auto &w) {
    w.position[R] = head + dir * pull;
    w.position[L] = tail - dir * pull;
  });
  a.hold(1000);
  report("pulled tight");
  a.move(100, [&](auto &w) {
    w.index[L] = false;
    w.index[R] = false;
  });
  a.hold(1000);
  const auto final_report = report("released");

  std::ofstream out(out_path);
  out << "# Reference knotting plan: lays the default 50-bead chain along an open\n"
         "# trefoil with the head held clear, then pulls the ends apart.\n";
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# server: --thermostat langevin --temp %g --gamma %g --seed %llu --rate %d --steps-per-frame %d "
                "--dt %g\n",
                temperature, gamma, static_cast<unsigned long long>(seed), cfg.frame_rate, cfg.steps_per_frame,
                cfg.integrator.dt);
  out << buf;
  std::snprintf(buf, sizeof buf, "# authored frames: %llu, first trefoil checkpoint: frame %lld, final: %s\n",
                static_cast<unsigned long long>(a.frame),
                a.first_trefoil ? static_cast<long long>(*a.first_trefoil) : -1LL,
                knot::to_string(final_report.classification).c_str());
  out << buf;
  std::fprintf(stderr, "%s", buf);
  harness::write_plan(out, harness::AgentPlan(a.wps));
  return a.first_trefoil ? 0 : 1;
}
