#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mudra/gesture.hpp"
#include "mudra/md/integrator.hpp"
#include "mudra/net/protocol.hpp"
#include "mudra/world_transform.hpp"

namespace mudra::net {

struct SessionConfig {
  int frame_rate = 30;
  int steps_per_frame = 10;
  md::IntegratorConfig integrator;
  GestureConfig gesture;
  HandOffsets offsets;
  double grab_stiffness = md::kDefaultGrabStiffness;
  double grab_max_force = md::kDefaultGrabMaxForce;

  /// Throws std::invalid_argument on non-positive rates or a bad integrator.
  void validate() const;
};

struct TickResult {
  Frame frame;
  std::vector<GestureCommand> commands;
  /// Set when the tick hit a blowup and the state was rolled back; the
  /// frame then carries the restored checkpoint.
  std::optional<ErrorMsg> reset;
};

/// The simulation side of the server with no networking: gesture engine,
/// world transform, grabs and MD, advanced one frame per tick.
class SimulationSession {
public:
  SimulationSession(md::Topology topology, std::vector<Vec3> initial_positions, SessionConfig config);

  /// Runs one frame with the latest input per hand. A hand without a new
  /// input keeps its previous one; a hand never heard from has open circuits.
  TickResult tick(const std::array<std::optional<HandInput>, 2> &inputs);

  /// Treats the hand's circuits as open immediately (client went away).
  std::vector<GestureCommand> release(HandSide hand);

  const md::Topology &topology() const { return ff_.topology(); }
  const md::SimState &state() const { return state_; }
  const Similarity &world_transform() const { return transform_; }
  const GestureState &gesture_state() const { return gesture_; }
  const SessionConfig &config() const { return config_; }
  /// Inputs the most recent tick ran with, {left, right}.
  const InputFrame &last_inputs() const { return last_input_; }
  std::uint64_t next_frame_id() const { return frame_id_; }
  std::uint64_t resets() const { return resets_; }
  bool transform_degraded() const;

  /// Frame for the current state without advancing.
  Frame snapshot() const;

private:
  void apply(const GestureCommand &cmd);
  void grab_begin(HandSide hand, const Vec3 &pinch_world);
  std::vector<md::GrabForce> grab_forces() const;

  md::ForceField ff_;
  SessionConfig config_;
  md::SimState state_;
  md::SimState checkpoint_;
  GestureState gesture_;
  InputFrame last_input_;
  Similarity transform_;
  std::optional<TransformSession> transform_session_;
  bool transform_pending_ = false;
  std::array<std::optional<md::GrabForce>, 2> grabs_;
  std::uint64_t frame_id_ = 0;
  std::uint64_t resets_ = 0;
};

} // namespace mudra::net
