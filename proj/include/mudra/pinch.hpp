#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mudra/geometry.hpp"

namespace mudra {

enum class HandSide { Left, Right };

char hand_code(HandSide h);
/// Accepts "L" or "R"; anything else yields nullopt.
std::optional<HandSide> parse_hand(std::string_view s);
constexpr std::size_t hand_index(HandSide h) { return h == HandSide::Left ? 0 : 1; }

/// Largest admissible distance between the tracker origin and a pinch, meters.
inline constexpr double kMaxPinchReach = 0.30;

/// Fixed pinch location in the tracker-local frame (origin at the center of
/// the tracker's flat side).
class PinchOffset {
public:
  /// Zero offset: pinch located at the tracker origin.
  explicit PinchOffset(HandSide hand) : hand_(hand) {}
  /// Throws std::invalid_argument when |offset| >= kMaxPinchReach.
  PinchOffset(HandSide hand, const Vec3 &offset);

  HandSide hand() const { return hand_; }
  const Vec3 &offset() const { return offset_; }

private:
  HandSide hand_;
  Vec3 offset_;
};

struct PinchSampleSet {
  HandSide hand = HandSide::Right;
  std::vector<Vec3> samples;
  std::vector<std::string> subject_ids;
};

/// Per-axis sample standard deviation is reported as `spread`.
struct CalibrationResult {
  HandSide hand = HandSide::Right;
  Vec3 centroid;
  Vec3 spread;
  std::size_t n = 0;
};

class InsufficientDataError : public std::runtime_error {
public:
  InsufficientDataError(HandSide hand, std::size_t n);
  std::size_t count() const { return n_; }

private:
  std::size_t n_;
};

class RejectedSampleError : public std::runtime_error {
public:
  explicit RejectedSampleError(std::size_t index);
  std::size_t index() const { return index_; }

private:
  std::size_t index_;
};

/// Malformed line in a calibration sample or result file.
class CalibrationFormatError : public std::runtime_error {
public:
  CalibrationFormatError(std::size_t line, const std::string &what);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

Vec3 pinch_point(const Pose &pose, const PinchOffset &offset);
Vec3 to_tracker_frame(const Vec3 &world_point, const Pose &pose);

CalibrationResult calibrate(const PinchSampleSet &samples);

/// Parses `hand,subject_id,x,y,z` lines. Returns one set per hand present,
/// left first.
std::vector<PinchSampleSet> read_pinch_samples(std::istream &in);
void write_pinch_samples(std::ostream &out, const PinchSampleSet &samples);

void write_calibration(std::ostream &out, const CalibrationResult &r);
std::vector<CalibrationResult> read_calibration(std::istream &in);

/// Offsets for both hands from a calibration file; hands missing from the
/// file keep the zero offset.
struct HandOffsets {
  PinchOffset left{HandSide::Left};
  PinchOffset right{HandSide::Right};
  bool left_calibrated = false;
  bool right_calibrated = false;

  const PinchOffset &operator[](HandSide h) const { return h == HandSide::Left ? left : right; }
};

HandOffsets offsets_from_calibration(const std::vector<CalibrationResult> &results);

} // namespace mudra
