#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mudra/gesture.hpp"

namespace mudra::harness {

/// Both hands at one instant. Positions are world-space pinch points; the
/// agent sends them as tracker positions with identity orientation, so the
/// server must run with zero pinch offsets for them to coincide.
struct Waypoint {
  std::int64_t t_ms = 0;
  std::array<Vec3, 2> position;
  std::array<bool, 2> index{false, false};
  std::array<bool, 2> middle{false, false};

  friend bool operator==(const Waypoint &, const Waypoint &) = default;
};

class PlanFormatError : public std::runtime_error {
public:
  PlanFormatError(std::size_t line, const std::string &what);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Timed waypoints. Positions are interpolated linearly between waypoints;
/// circuit states hold the value of the most recent waypoint.
class AgentPlan {
public:
  AgentPlan() = default;
  /// Throws std::invalid_argument unless timestamps strictly increase.
  explicit AgentPlan(std::vector<Waypoint> waypoints);

  const std::vector<Waypoint> &waypoints() const { return waypoints_; }
  bool empty() const { return waypoints_.empty(); }
  std::int64_t duration_ms() const { return waypoints_.empty() ? 0 : waypoints_.back().t_ms; }

  /// Inputs for both hands at time t (clamped to the plan's span). An empty
  /// plan yields idle hands at the origin.
  InputFrame at(std::int64_t t_ms) const;

  friend bool operator==(const AgentPlan &, const AgentPlan &) = default;

private:
  std::vector<Waypoint> waypoints_;
};

/// Frame k of an agent running at `rate` Hz happens at round(k * 1000 / rate) ms.
std::int64_t frame_time_ms(std::uint64_t frame, int rate);

/// One waypoint per line:
///   t_ms  Lx Ly Lz Lidx Lmid  Rx Ry Rz Ridx Rmid
/// with `#` comments and blank lines ignored.
AgentPlan read_plan(std::istream &in);
AgentPlan load_plan(const std::string &path);
void write_plan(std::ostream &out, const AgentPlan &plan);

} // namespace mudra::harness
