#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mudra/geometry.hpp"
#include "mudra/pinch.hpp"

namespace mudra {

/// One glove sample: tracker pose plus the two thumb circuits.
struct HandInput {
  HandSide hand = HandSide::Left;
  Pose pose;
  bool pinch_index = false;
  bool pinch_middle = false;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const HandInput &, const HandInput &) = default;
};

struct GrabBegin {
  HandSide hand;
  Vec3 pinch_point;
  friend bool operator==(const GrabBegin &, const GrabBegin &) = default;
};
struct GrabUpdate {
  HandSide hand;
  Vec3 pinch_point;
  friend bool operator==(const GrabUpdate &, const GrabUpdate &) = default;
};
struct GrabEnd {
  HandSide hand;
  friend bool operator==(const GrabEnd &, const GrabEnd &) = default;
};
struct TransformBegin {
  Vec3 left_point;
  Vec3 right_point;
  friend bool operator==(const TransformBegin &, const TransformBegin &) = default;
};
struct TransformUpdate {
  Vec3 left_point;
  Vec3 right_point;
  friend bool operator==(const TransformUpdate &, const TransformUpdate &) = default;
};
struct TransformEnd {
  friend bool operator==(const TransformEnd &, const TransformEnd &) = default;
};

using GestureCommand = std::variant<GrabBegin, GrabUpdate, GrabEnd, TransformBegin, TransformUpdate, TransformEnd>;

/// Canonical one-line text form, used for golden comparisons.
std::string to_string(const GestureCommand &cmd);

struct GestureConfig {
  std::int64_t debounce_ms = 20;
};

/// Debounced view of one binary circuit.
struct CircuitFilter {
  bool raw = false;
  bool stable = false;
  std::int64_t raw_since_ms = 0;

  friend bool operator==(const CircuitFilter &, const CircuitFilter &) = default;
};

struct HandGestureState {
  CircuitFilter index;
  CircuitFilter middle;
  std::int64_t last_timestamp_ms = 0;
  bool seen = false;
  bool grab_active = false;

  friend bool operator==(const HandGestureState &, const HandGestureState &) = default;
};

struct GestureState {
  std::array<HandGestureState, 2> hands;
  bool transform_active = false;
  /// Count of inputs whose timestamp went backwards and was clamped.
  std::uint64_t clamped_timestamps = 0;

  const HandGestureState &hand(HandSide h) const { return hands[hand_index(h)]; }
  HandGestureState &hand(HandSide h) { return hands[hand_index(h)]; }

  friend bool operator==(const GestureState &, const GestureState &) = default;
};

struct GestureStep {
  GestureState state;
  std::vector<GestureCommand> commands;
};

GestureStep gesture_step(const GestureState &state, const HandInput &left, const HandInput &right,
                         const HandOffsets &offsets, const GestureConfig &config = {});

/// Opens both circuits of `hand` without debouncing and ends whatever
/// session depended on them. Used when a hand's input source disappears; the
/// hand's timestamp history is cleared so a new source may start from zero.
GestureStep release_hand(const GestureState &state, HandSide hand);

using InputFrame = std::array<HandInput, 2>; // {left, right}

std::vector<GestureCommand> replay_inputs(const std::vector<InputFrame> &stream, const HandOffsets &offsets,
                                          const GestureConfig &config = {});

/// Line-oriented session file: `t_ms,hand,px,py,pz,qw,qx,qy,qz,idx,mid`,
/// two lines (one per hand, any order) per step, `#` comments allowed.
class SessionFormatError : public std::runtime_error {
public:
  SessionFormatError(std::size_t line, const std::string &what);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

std::string format_hand_input(const HandInput &in);
HandInput parse_hand_input(const std::string &line, std::size_t lineno = 0);
void write_session(std::ostream &out, const std::vector<InputFrame> &stream);
std::vector<InputFrame> read_session(std::istream &in);

} // namespace mudra
