#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "mudra/harness/plan.hpp"
#include "mudra/knot.hpp"

namespace mudra::harness {

/// The agent lost its connection or the server refused it.
class HarnessError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct KnottingResult {
  bool success = false;
  /// Frames driven until the first Trefoil checkpoint, or the whole budget.
  std::uint64_t frames_used = 0;
  knot::KnotReport report;
};

/// Claims both hands on a live server, sends the plan's inputs one frame at
/// a time (frame k carries the plan at frame_time_ms(k)), and analyzes the
/// chain every frame_rate frames. Stops at the first Trefoil or after
/// budget_frames frames.
KnottingResult scripted_knotting(const std::string &host, unsigned short port, const AgentPlan &plan,
                                 std::uint64_t budget_frames);

} // namespace mudra::harness
