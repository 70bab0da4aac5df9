#include "mudra/pinch.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace mudra {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_real(const std::string &s) {
  double v = 0.0;
  const auto *end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string strip_comment(const std::string &line) {
  const auto hash = line.find('#');
  return trim(hash == std::string::npos ? line : line.substr(0, hash));
}

std::string format_xyz(const Vec3 &v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6g %.6g %.6g", v.x, v.y, v.z);
  return buf;
}

} // namespace

char hand_code(HandSide h) { return h == HandSide::Left ? 'L' : 'R'; }

std::optional<HandSide> parse_hand(std::string_view s) {
  if (s == "L") {
    return HandSide::Left;
  }
  if (s == "R") {
    return HandSide::Right;
  }
  return std::nullopt;
}

PinchOffset::PinchOffset(HandSide hand, const Vec3 &offset) : hand_(hand), offset_(offset) {
  if (!is_finite(offset) || !(norm(offset) < kMaxPinchReach)) {
    throw std::invalid_argument("pinch offset must lie within 0.30 m of the tracker origin");
  }
}

InsufficientDataError::InsufficientDataError(HandSide hand, std::size_t n)
    : std::runtime_error("insufficient calibration data for hand " + std::string(1, hand_code(hand)) + ": " +
                         std::to_string(n) + " sample(s), need at least 2"),
      n_(n) {}

RejectedSampleError::RejectedSampleError(std::size_t index)
    : std::runtime_error("rejected sample " + std::to_string(index) + ": farther than 0.30 m from the tracker origin"),
      index_(index) {}

CalibrationFormatError::CalibrationFormatError(std::size_t line, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

Vec3 pinch_point(const Pose &pose, const PinchOffset &offset) {
  return pose.position + pose.orientation.apply(offset.offset());
}

Vec3 to_tracker_frame(const Vec3 &world_point, const Pose &pose) {
  return pose.orientation.inverse().apply(world_point - pose.position);
}

CalibrationResult calibrate(const PinchSampleSet &set) {
  const auto &s = set.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_finite(s[i]) || !(norm(s[i]) < kMaxPinchReach)) {
      throw RejectedSampleError(i);
    }
  }
  if (s.size() < 2) {
    throw InsufficientDataError(set.hand, s.size());
  }

  // Two-pass mean/variance; sample order only enters through rounding.
  const auto n = static_cast<double>(s.size());
  Vec3 mean;
  for (const auto &p : s) {
    mean += p;
  }
  mean = mean / n;

  Vec3 ss;
  for (const auto &p : s) {
    const Vec3 d = p - mean;
    ss += Vec3{d.x * d.x, d.y * d.y, d.z * d.z};
  }
  const Vec3 var = ss / (n - 1.0);

  return {set.hand, mean, {std::sqrt(var.x), std::sqrt(var.y), std::sqrt(var.z)}, s.size()};
}

std::vector<PinchSampleSet> read_pinch_samples(std::istream &in) {
  std::array<PinchSampleSet, 2> sets;
  sets[0].hand = HandSide::Left;
  sets[1].hand = HandSide::Right;
  std::array<bool, 2> seen{false, false};

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = strip_comment(line);
    if (body.empty()) {
      continue;
    }
    const auto fields = split(body, ',');
    if (fields.size() != 5) {
      throw CalibrationFormatError(lineno, "expected hand,subject_id,x,y,z");
    }
    const auto hand = parse_hand(fields[0]);
    if (!hand) {
      throw CalibrationFormatError(lineno, "hand must be L or R");
    }
    std::array<double, 3> xyz{};
    for (int k = 0; k < 3; ++k) {
      const auto v = parse_real(fields[2 + k]);
      if (!v) {
        throw CalibrationFormatError(lineno, "coordinate '" + fields[2 + k] + "' is not a finite number");
      }
      xyz[k] = *v;
    }
    auto &set = sets[hand_index(*hand)];
    seen[hand_index(*hand)] = true;
    set.samples.push_back({xyz[0], xyz[1], xyz[2]});
    set.subject_ids.push_back(fields[1]);
  }

  std::vector<PinchSampleSet> out;
  for (std::size_t k = 0; k < 2; ++k) {
    if (seen[k]) {
      out.push_back(std::move(sets[k]));
    }
  }
  return out;
}

void write_pinch_samples(std::ostream &out, const PinchSampleSet &set) {
  char buf[128];
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const auto &p = set.samples[i];
    const std::string id = i < set.subject_ids.size() ? set.subject_ids[i] : std::to_string(i);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", p.x, p.y, p.z);
    out << hand_code(set.hand) << ',' << id << ',' << buf << '\n';
  }
}

void write_calibration(std::ostream &out, const CalibrationResult &r) {
  out << "hand = " << hand_code(r.hand) << '\n';
  out << "n = " << r.n << '\n';
  out << "centroid_xyz = " << format_xyz(r.centroid) << '\n';
  out << "spread_xyz = " << format_xyz(r.spread) << '\n';
}

std::vector<CalibrationResult> read_calibration(std::istream &in) {
  std::vector<CalibrationResult> out;
  std::map<std::string, bool> have;
  auto finish = [&](std::size_t lineno) {
    if (have.empty()) {
      return;
    }
    for (const char *key : {"hand", "n", "centroid_xyz", "spread_xyz"}) {
      if (!have.count(key)) {
        throw CalibrationFormatError(lineno, std::string("record missing field ") + key);
      }
    }
    have.clear();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = strip_comment(line);
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw CalibrationFormatError(lineno, "expected key = value");
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));

    if (key == "hand") {
      finish(lineno);
      const auto hand = parse_hand(value);
      if (!hand) {
        throw CalibrationFormatError(lineno, "hand must be L or R");
      }
      out.push_back({});
      out.back().hand = *hand;
      have["hand"] = true;
      continue;
    }
    if (out.empty()) {
      throw CalibrationFormatError(lineno, "record must start with hand");
    }
    auto &rec = out.back();
    if (key == "n") {
      std::size_t n = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw CalibrationFormatError(lineno, "n must be a non-negative integer");
      }
      rec.n = n;
    } else if (key == "centroid_xyz" || key == "spread_xyz") {
      std::istringstream ss(value);
      std::array<std::string, 3> tok;
      std::string extra;
      if (!(ss >> tok[0] >> tok[1] >> tok[2]) || (ss >> extra)) {
        throw CalibrationFormatError(lineno, key + " needs three numbers");
      }
      std::array<double, 3> xyz{};
      for (int k = 0; k < 3; ++k) {
        const auto v = parse_real(tok[k]);
        if (!v) {
          throw CalibrationFormatError(lineno, key + " component '" + tok[k] + "' is not a finite number");
        }
        xyz[k] = *v;
      }
      (key == "centroid_xyz" ? rec.centroid : rec.spread) = {xyz[0], xyz[1], xyz[2]};
    } else {
      throw CalibrationFormatError(lineno, "unknown key '" + key + "'");
    }
    have[key] = true;
  }
  finish(lineno);
  return out;
}

HandOffsets offsets_from_calibration(const std::vector<CalibrationResult> &results) {
  HandOffsets offsets;
  for (const auto &r : results) {
    if (r.hand == HandSide::Left) {
      offsets.left = PinchOffset(HandSide::Left, r.centroid);
      offsets.left_calibrated = true;
    } else {
      offsets.right = PinchOffset(HandSide::Right, r.centroid);
      offsets.right_calibrated = true;
    }
  }
  return offsets;
}

} // namespace mudra
