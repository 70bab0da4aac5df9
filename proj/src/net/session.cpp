#include "mudra/net/session.hpp"

#include <stdexcept>

#include "mudra/md/interaction.hpp"

namespace mudra::net {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

HandInput idle_input(HandSide hand) {
  HandInput in;
  in.hand = hand;
  return in;
}

} // namespace

void SessionConfig::validate() const {
  if (frame_rate <= 0) {
    throw std::invalid_argument("frame rate must be positive");
  }
  if (steps_per_frame <= 0) {
    throw std::invalid_argument("steps per frame must be positive");
  }
  if (!(grab_stiffness > 0.0) || !(grab_max_force > 0.0)) {
    throw std::invalid_argument("grab stiffness and force cap must be positive");
  }
  integrator.validate();
}

SimulationSession::SimulationSession(md::Topology topology, std::vector<Vec3> initial_positions,
                                     SessionConfig config)
    : ff_(std::move(topology)), config_(std::move(config)), state_(md::make_state(std::move(initial_positions))),
      last_input_{idle_input(HandSide::Left), idle_input(HandSide::Right)} {
  config_.validate();
  if (state_.positions.size() != ff_.n_atoms()) {
    throw std::invalid_argument("initial positions do not match the topology");
  }
  md::refresh_forces(state_, ff_, {});
  checkpoint_ = state_;
}

bool SimulationSession::transform_degraded() const {
  return transform_session_ && transform_session_->degraded;
}

std::vector<md::GrabForce> SimulationSession::grab_forces() const {
  std::vector<md::GrabForce> out;
  for (const auto &g : grabs_) {
    if (g) {
      out.push_back(*g);
    }
  }
  return out;
}

void SimulationSession::grab_begin(HandSide hand, const Vec3 &pinch_world) {
  const Vec3 target = md::world_to_sim(pinch_world, transform_);
  const std::size_t atom = md::nearest_atom(state_.positions, target);
  grabs_[hand_index(hand)] = md::GrabForce{atom, target, config_.grab_stiffness, config_.grab_max_force};
}

void SimulationSession::apply(const GestureCommand &cmd) {
  std::visit(overloaded{
                 [&](const GrabBegin &c) { grab_begin(c.hand, c.pinch_point); },
                 [&](const GrabUpdate &c) {
                   auto &g = grabs_[hand_index(c.hand)];
                   if (g) {
                     g->target = md::world_to_sim(c.pinch_point, transform_);
                   }
                 },
                 [&](const GrabEnd &c) { grabs_[hand_index(c.hand)].reset(); },
                 [&](const TransformBegin &c) {
                   try {
                     transform_session_ = transform_begin(c.left_point, c.right_point, transform_);
                     transform_pending_ = false;
                   } catch (const HandsCoincidentError &) {
                     transform_session_.reset();
                     transform_pending_ = true;
                   }
                 },
                 [&](const TransformUpdate &c) {
                   if (transform_pending_) {
                     apply(TransformBegin{c.left_point, c.right_point});
                   } else if (transform_session_) {
                     transform_ = transform_update(*transform_session_, c.left_point, c.right_point);
                   }
                 },
                 [&](const TransformEnd &) {
                   transform_session_.reset();
                   transform_pending_ = false;
                 },
             },
             cmd);
}

std::vector<GestureCommand> SimulationSession::release(HandSide hand) {
  auto step = release_hand(gesture_, hand);
  gesture_ = step.state;
  last_input_[hand_index(hand)] = idle_input(hand);
  for (const auto &c : step.commands) {
    apply(c);
  }
  return step.commands;
}

TickResult SimulationSession::tick(const std::array<std::optional<HandInput>, 2> &inputs) {
  for (std::size_t h = 0; h < 2; ++h) {
    if (inputs[h]) {
      last_input_[h] = *inputs[h];
    }
  }
  TickResult result;
  auto step = gesture_step(gesture_, last_input_[0], last_input_[1], config_.offsets, config_.gesture);
  gesture_ = step.state;
  result.commands = std::move(step.commands);
  for (const auto &c : result.commands) {
    apply(c);
  }

  const auto forces = grab_forces();
  try {
    for (int k = 0; k < config_.steps_per_frame; ++k) {
      md::step_vv(state_, ff_, forces, config_.integrator);
    }
  } catch (const md::SimulationBlowupError &e) {
    state_ = checkpoint_;
    md::refresh_forces(state_, ff_, {});
    ++resets_;
    for (auto hand : {HandSide::Left, HandSide::Right}) {
      if (grabs_[hand_index(hand)]) {
        auto released = release(hand);
        result.commands.insert(result.commands.end(), released.begin(), released.end());
      }
    }
    result.reset = ErrorMsg{ErrorCode::SimReset, e.what()};
  }

  result.frame = snapshot();
  ++frame_id_;
  if (!result.reset && frame_id_ % static_cast<std::uint64_t>(config_.frame_rate) == 0) {
    checkpoint_ = state_;
  }
  return result;
}

Frame SimulationSession::snapshot() const {
  Frame f;
  f.id = frame_id_;
  f.time = state_.time;
  f.positions = state_.positions;
  f.potential_energy = state_.potential_energy;
  f.kinetic_energy = state_.kinetic_energy;
  f.transform = transform_;
  for (auto hand : {HandSide::Left, HandSide::Right}) {
    if (const auto &g = grabs_[hand_index(hand)]) {
      f.grabs.push_back({hand, g->atom, g->target});
    }
  }
  return f;
}

} // namespace mudra::net
