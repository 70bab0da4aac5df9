#include "mudra/harness/plan.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mudra::harness {

PlanFormatError::PlanFormatError(std::size_t line, const std::string &what)
    : std::runtime_error("plan line " + std::to_string(line) + ": " + what), line_(line) {}

AgentPlan::AgentPlan(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    if (waypoints_[i].t_ms <= waypoints_[i - 1].t_ms) {
      throw std::invalid_argument("plan timestamps must strictly increase");
    }
  }
}

InputFrame AgentPlan::at(std::int64_t t_ms) const {
  InputFrame out;
  for (std::size_t h = 0; h < 2; ++h) {
    out[h].hand = h == 0 ? HandSide::Left : HandSide::Right;
    out[h].timestamp_ms = t_ms;
  }
  if (waypoints_.empty()) {
    return out;
  }
  // Last waypoint at or before t.
  std::size_t k = 0;
  while (k + 1 < waypoints_.size() && waypoints_[k + 1].t_ms <= t_ms) {
    ++k;
  }
  const Waypoint &a = waypoints_[k];
  const bool between = k + 1 < waypoints_.size() && t_ms > a.t_ms;
  for (std::size_t h = 0; h < 2; ++h) {
    Vec3 p = a.position[h];
    if (between) {
      const Waypoint &b = waypoints_[k + 1];
      const double u = static_cast<double>(t_ms - a.t_ms) / static_cast<double>(b.t_ms - a.t_ms);
      p = a.position[h] + (b.position[h] - a.position[h]) * u;
    }
    out[h].pose.position = p;
    out[h].pinch_index = a.index[h];
    out[h].pinch_middle = a.middle[h];
  }
  return out;
}

std::int64_t frame_time_ms(std::uint64_t frame, int rate) {
  return static_cast<std::int64_t>(std::llround(static_cast<double>(frame) * 1000.0 / rate));
}

AgentPlan read_plan(std::istream &in) {
  std::vector<Waypoint> wps;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ss(line);
    Waypoint w;
    if (!(ss >> w.t_ms)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) {
        continue;
      }
      throw PlanFormatError(lineno, "expected a timestamp");
    }
    for (std::size_t h = 0; h < 2; ++h) {
      int idx = 0;
      int mid = 0;
      if (!(ss >> w.position[h].x >> w.position[h].y >> w.position[h].z >> idx >> mid)) {
        throw PlanFormatError(lineno, "expected 11 fields");
      }
      if ((idx != 0 && idx != 1) || (mid != 0 && mid != 1)) {
        throw PlanFormatError(lineno, "circuit states must be 0 or 1");
      }
      w.index[h] = idx == 1;
      w.middle[h] = mid == 1;
    }
    std::string extra;
    if (ss >> extra) {
      throw PlanFormatError(lineno, "trailing field \"" + extra + "\"");
    }
    if (!wps.empty() && w.t_ms <= wps.back().t_ms) {
      throw PlanFormatError(lineno, "timestamps must strictly increase");
    }
    wps.push_back(w);
  }
  return AgentPlan(std::move(wps));
}

AgentPlan load_plan(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open plan " + path);
  }
  return read_plan(in);
}

void write_plan(std::ostream &out, const AgentPlan &plan) {
  out << "# t_ms  Lx Ly Lz Lidx Lmid  Rx Ry Rz Ridx Rmid\n";
  char buf[512];
  for (const auto &w : plan.waypoints()) {
    std::snprintf(buf, sizeof buf, "%lld  %.17g %.17g %.17g %d %d  %.17g %.17g %.17g %d %d\n",
                  static_cast<long long>(w.t_ms), w.position[0].x, w.position[0].y, w.position[0].z,
                  w.index[0] ? 1 : 0, w.middle[0] ? 1 : 0, w.position[1].x, w.position[1].y, w.position[1].z,
                  w.index[1] ? 1 : 0, w.middle[1] ? 1 : 0);
    out << buf;
  }
}

} // namespace mudra::harness
