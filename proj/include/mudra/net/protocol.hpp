#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mudra/gesture.hpp"
#include "mudra/md/topology.hpp"

namespace mudra::net {

inline constexpr int kProtocolVersion = 1;

struct Hello {
  int version = kProtocolVersion;
  std::string name;
  /// Empty for observers that only watch frames.
  std::vector<HandSide> hands;

  friend bool operator==(const Hello &, const Hello &) = default;
};

struct Welcome {
  md::Topology topology;
  int frame_rate = 30;

  friend bool operator==(const Welcome &, const Welcome &) = default;
};

struct ActiveGrab {
  HandSide hand = HandSide::Left;
  std::size_t atom = 0;
  Vec3 target;

  friend bool operator==(const ActiveGrab &, const ActiveGrab &) = default;
};

struct Frame {
  std::uint64_t id = 0;
  double time = 0.0;
  std::vector<Vec3> positions;
  double potential_energy = 0.0;
  double kinetic_energy = 0.0;
  Similarity transform;
  std::vector<ActiveGrab> grabs;

  friend bool operator==(const Frame &, const Frame &) = default;
};

enum class ErrorCode { Version, HandTaken, SimReset, Malformed };

std::string to_string(ErrorCode c);

struct ErrorMsg {
  ErrorCode code = ErrorCode::Malformed;
  std::string detail;

  friend bool operator==(const ErrorMsg &, const ErrorMsg &) = default;
};

/// HandInput travels as the "input" message.
using Message = std::variant<Hello, Welcome, HandInput, Frame, ErrorMsg>;

class DecodeError : public std::runtime_error {
public:
  DecodeError(std::string field, const std::string &why);
  /// Name of the offending field, or "json" when the text is not JSON.
  const std::string &field() const { return field_; }

private:
  std::string field_;
};

std::string encode(const Message &msg);
Message decode(std::string_view text);

} // namespace mudra::net
