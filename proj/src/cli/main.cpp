#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mudra/harness/agent.hpp"
#include "mudra/harness/probe.hpp"
#include "mudra/knot.hpp"
#include "mudra/md/topology.hpp"
#include "mudra/net/server.hpp"
#include "mudra/pinch.hpp"

using namespace mudra;
using nlohmann::json;

namespace {

constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

// Errors that should exit with the domain-error code.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

json xyz(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

json report_json(const knot::KnotReport &r) {
  return {{"determinant", r.determinant},
          {"crossings_after_reduction", r.crossings_after_reduction},
          {"vertices_after_reduction", r.vertices_after_reduction},
          {"classification", knot::to_string(r.classification)},
          {"closure_perturbed", r.closure_perturbed},
          {"projection_retries", r.projection_retries}};
}

std::ifstream open_input(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw DomainError("cannot open " + path);
  }
  return in;
}

std::pair<std::string, unsigned short> split_endpoint(const std::string &endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw CLI::ValidationError("--bind", "expected host:port, got '" + endpoint + "'");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(endpoint.substr(colon + 1), &used);
    if (used != endpoint.size() - colon - 1) {
      throw std::invalid_argument("trailing characters");
    }
  } catch (const std::exception &) {
    throw CLI::ValidationError("--bind", "bad port in '" + endpoint + "'");
  }
  if (port < 0 || port > 65535) {
    throw CLI::ValidationError("--bind", "port out of range in '" + endpoint + "'");
  }
  return {endpoint.substr(0, colon), static_cast<unsigned short>(port)};
}

HandOffsets load_offsets(const std::string &path) {
  if (path.empty()) {
    return {};
  }
  auto in = open_input(path);
  return offsets_from_calibration(read_calibration(in));
}

struct ServeOptions {
  std::string bind = "127.0.0.1:9876";
  int rate = 30;
  int steps_per_frame = 10;
  std::string topology;
  std::string calibration;
  double dt = 0.005;
  std::string thermostat = "langevin";
  double temperature = 1.0;
  double gamma = 1.0;
  bool lockstep = false;
  std::string record;
  double duration = 0.0;
};

int run_serve(const ServeOptions &o, std::uint64_t seed) {
  net::ServerConfig cfg;
  std::tie(cfg.address, cfg.port) = split_endpoint(o.bind);
  if (!o.topology.empty()) {
    auto in = open_input(o.topology);
    cfg.topology = md::read_topology(in);
    md::ChainParams shape;
    if (!cfg.topology.bonds.empty()) {
      shape.r0 = cfg.topology.bonds.front().r0;
    }
    if (!cfg.topology.angles.empty()) {
      shape.theta0 = cfg.topology.angles.front().theta0;
    }
    cfg.initial_positions = md::zigzag_chain(cfg.topology.n_atoms(), shape);
  }
  cfg.session.frame_rate = o.rate;
  cfg.session.steps_per_frame = o.steps_per_frame;
  cfg.session.offsets = load_offsets(o.calibration);
  cfg.session.integrator.dt = o.dt;
  if (o.thermostat == "langevin") {
    cfg.session.integrator.langevin = md::LangevinParams{o.temperature, o.gamma, seed};
  }
  cfg.lockstep = o.lockstep;
  cfg.record_path = o.record;

  net::Server server(std::move(cfg));
  server.start();
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(o.duration);
  while (!g_interrupted && (o.duration <= 0.0 || std::chrono::steady_clock::now() < until)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  server.stop();
  const auto s = server.stats();
  spdlog::info("served {} frames to {} clients, {} resets", s.frames, s.clients_accepted, s.resets);
  return 0;
}

int run_calibrate(const std::string &path, bool as_json) {
  auto in = open_input(path);
  const auto sets = read_pinch_samples(in);
  if (sets.empty()) {
    throw InsufficientDataError(HandSide::Right, 0);
  }
  json out = json::array();
  for (const auto &set : sets) {
    const auto r = calibrate(set);
    if (as_json) {
      out.push_back({{"hand", std::string(1, hand_code(r.hand))},
                     {"n", r.n},
                     {"centroid_xyz", xyz(r.centroid)},
                     {"spread_xyz", xyz(r.spread)}});
    } else {
      write_calibration(std::cout, r);
    }
  }
  if (as_json) {
    std::cout << out.dump() << '\n';
  }
  return 0;
}

int run_replay(const std::string &path, const std::string &calibration, bool as_json) {
  auto in = open_input(path);
  const auto stream = read_session(in);
  const auto commands = replay_inputs(stream, load_offsets(calibration));
  json out = json::array();
  for (const auto &c : commands) {
    if (as_json) {
      out.push_back(to_string(c));
    } else {
      std::cout << to_string(c) << '\n';
    }
  }
  if (as_json) {
    std::cout << out.dump() << '\n';
  }
  return 0;
}

int run_knot_check(const std::string &path, bool open_chain, bool as_json) {
  auto in = open_input(path);
  const auto vertices = knot::read_vertices(in);
  const auto report = open_chain ? knot::analyze_chain(vertices) : knot::analyze_polygon(knot::ClosedPolygon(vertices));
  if (as_json) {
    std::cout << report_json(report).dump() << '\n';
  } else {
    knot::write_report(std::cout, report);
  }
  return 0;
}

int run_probe(const std::string &endpoint, int clients, double duration, bool as_json) {
  const auto [host, port] = split_endpoint(endpoint);
  const auto r = harness::broadcast_latency_probe(host, port, clients, std::chrono::duration<double>(duration));
  if (as_json) {
    std::cout << harness::probe_report_json(r) << '\n';
  } else {
    harness::write_probe_report(std::cout, r);
  }
  return r.clean() ? 0 : kDomainError;
}

int run_demo_agent(const std::string &endpoint, const std::string &plan_path, std::uint64_t budget, bool as_json) {
  const auto [host, port] = split_endpoint(endpoint);
  const auto plan = harness::load_plan(plan_path);
  const auto r = harness::scripted_knotting(host, port, plan, budget);
  if (as_json) {
    json j = report_json(r.report);
    j["success"] = r.success;
    j["frames_used"] = r.frames_used;
    std::cout << j.dump() << '\n';
  } else {
    std::cout << "success = " << (r.success ? "true" : "false") << '\n';
    std::cout << "frames_used = " << r.frames_used << '\n';
    knot::write_report(std::cout, r.report);
  }
  if (!r.success) {
    spdlog::error("no trefoil within {} frames", budget);
  }
  return r.success ? 0 : kDomainError;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Glove-driven interactive molecular dynamics: server, calibration and task harness"};
  app.require_subcommand(1);
  std::string log_level = "info";
  std::uint64_t seed = 0;
  bool as_json = false;
  app.add_option("--log-level", log_level, "Diagnostics threshold")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_option("--seed", seed, "Seed for every stochastic component");
  app.add_flag("--json", as_json, "Machine-readable output");

  ServeOptions serve;
  auto *serve_cmd = app.add_subcommand("serve", "Run the simulation server");
  serve_cmd->add_option("--bind", serve.bind, "host:port to listen on");
  serve_cmd->add_option("--rate", serve.rate, "Frames per second")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--steps-per-frame", serve.steps_per_frame, "MD steps per frame")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--topology", serve.topology, "Topology file (default: 50-bead chain)");
  serve_cmd->add_option("--calibration", serve.calibration, "Calibration file with pinch offsets");
  serve_cmd->add_option("--dt", serve.dt, "Timestep")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--thermostat", serve.thermostat)->check(CLI::IsMember({"none", "langevin"}));
  serve_cmd->add_option("--temp", serve.temperature, "Langevin temperature")->check(CLI::NonNegativeNumber);
  serve_cmd->add_option("--gamma", serve.gamma, "Langevin friction")->check(CLI::NonNegativeNumber);
  serve_cmd->add_flag("--lockstep", serve.lockstep, "Tick only when every claimed hand has sent input");
  serve_cmd->add_option("--record", serve.record, "Write every tick's inputs to this session file");
  serve_cmd->add_option("--duration", serve.duration, "Stop after this many seconds (0: run until signalled)")
      ->check(CLI::NonNegativeNumber);

  std::string path;
  std::string calibration;
  auto *calibrate_cmd = app.add_subcommand("calibrate", "Estimate pinch offsets from a sample file");
  calibrate_cmd->add_option("samples", path, "CSV of hand,subject_id,x,y,z")->required();

  auto *replay_cmd = app.add_subcommand("replay", "Replay a session file through the gesture engine");
  replay_cmd->add_option("session", path, "Session file")->required();
  replay_cmd->add_option("--calibration", calibration, "Calibration file with pinch offsets");

  bool open_chain = false;
  auto *knot_cmd = app.add_subcommand("knot-check", "Classify the knot in a polygon or chain file");
  knot_cmd->add_option("chain", path, "One vertex per line; the last connects back to the first")->required();
  knot_cmd->add_flag("--open", open_chain, "Treat the vertices as an open chain and close it radially");

  std::string endpoint = "127.0.0.1:9876";
  int clients = 1;
  double duration = 10.0;
  auto *probe_cmd = app.add_subcommand("probe", "Measure broadcast latency and frame continuity");
  probe_cmd->add_option("--server", endpoint, "host:port of the server");
  probe_cmd->add_option("--clients", clients, "Simulated clients")->required()->check(CLI::PositiveNumber);
  probe_cmd->add_option("--duration", duration, "Seconds")->required()->check(CLI::PositiveNumber);

  std::uint64_t budget = 20000;
  auto *agent_cmd = app.add_subcommand("demo-agent", "Drive a knotting plan against a server");
  agent_cmd->add_option("--server", endpoint, "host:port of the server");
  agent_cmd->add_option("--plan", path, "Plan file")->required();
  agent_cmd->add_option("--budget", budget, "Frame budget")->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsageError;
  }

  auto logger = spdlog::stderr_color_mt("mudra");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*serve_cmd) {
      return run_serve(serve, seed);
    }
    if (*calibrate_cmd) {
      return run_calibrate(path, as_json);
    }
    if (*replay_cmd) {
      return run_replay(path, calibration, as_json);
    }
    if (*knot_cmd) {
      return run_knot_check(path, open_chain, as_json);
    }
    if (*probe_cmd) {
      return run_probe(endpoint, clients, duration, as_json);
    }
    return run_demo_agent(endpoint, path, budget, as_json);
  } catch (const CLI::ValidationError &e) {
    spdlog::error("{}", e.what());
    return kUsageError;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kDomainError;
  }
}
