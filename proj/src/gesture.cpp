#include "mudra/gesture.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>

namespace mudra {

namespace {

// Returns true when the stable value changed on this sample.
bool filter_circuit(CircuitFilter &f, bool raw, std::int64_t t, std::int64_t debounce_ms) {
  if (raw != f.raw) {
    f.raw = raw;
    f.raw_since_ms = t;
  }
  if (f.raw != f.stable && t - f.raw_since_ms >= debounce_ms) {
    f.stable = f.raw;
    return true;
  }
  return false;
}

struct EdgeFlags {
  bool index_rose = false;
};

EdgeFlags advance_hand(GestureState &state, const HandInput &in, const GestureConfig &cfg) {
  auto &h = state.hand(in.hand);
  std::int64_t t = in.timestamp_ms;
  if (h.seen && t < h.last_timestamp_ms) {
    t = h.last_timestamp_ms;
    ++state.clamped_timestamps;
  }
  h.seen = true;
  h.last_timestamp_ms = t;

  EdgeFlags edges;
  if (filter_circuit(h.index, in.pinch_index, t, cfg.debounce_ms)) {
    edges.index_rose = h.index.stable;
  }
  filter_circuit(h.middle, in.pinch_middle, t, cfg.debounce_ms);
  return edges;
}

std::string fmt_vec(const Vec3 &v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", v.x, v.y, v.z);
  return buf;
}

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string to_string(const GestureCommand &cmd) {
  return std::visit(
      overloaded{
          [](const GrabBegin &c) { return std::string("GrabBegin ") + hand_code(c.hand) + ' ' + fmt_vec(c.pinch_point); },
          [](const GrabUpdate &c) { return std::string("GrabUpdate ") + hand_code(c.hand) + ' ' + fmt_vec(c.pinch_point); },
          [](const GrabEnd &c) { return std::string("GrabEnd ") + hand_code(c.hand); },
          [](const TransformBegin &c) { return "TransformBegin " + fmt_vec(c.left_point) + ' ' + fmt_vec(c.right_point); },
          [](const TransformUpdate &c) {
            return "TransformUpdate " + fmt_vec(c.left_point) + ' ' + fmt_vec(c.right_point);
          },
          [](const TransformEnd &) { return std::string("TransformEnd"); },
      },
      cmd);
}

GestureStep gesture_step(const GestureState &state, const HandInput &left, const HandInput &right,
                         const HandOffsets &offsets, const GestureConfig &config) {
  if (left.hand != HandSide::Left || right.hand != HandSide::Right) {
    throw std::invalid_argument("gesture_step expects (left, right) inputs");
  }
  GestureStep out{state, {}};
  auto &s = out.state;
  auto &cmds = out.commands;

  const std::array<EdgeFlags, 2> edges{advance_hand(s, left, config), advance_hand(s, right, config)};
  const std::array<const HandInput *, 2> inputs{&left, &right};
  const std::array<Vec3, 2> points{pinch_point(left.pose, offsets[HandSide::Left]),
                                   pinch_point(right.pose, offsets[HandSide::Right])};

  const bool both_middle = s.hands[0].middle.stable && s.hands[1].middle.stable;
  if (!s.transform_active && both_middle) {
    for (auto &h : s.hands) {
      if (h.grab_active) {
        h.grab_active = false;
        cmds.emplace_back(GrabEnd{&h == &s.hands[0] ? HandSide::Left : HandSide::Right});
      }
    }
    s.transform_active = true;
    cmds.emplace_back(TransformBegin{points[0], points[1]});
    return out;
  }
  if (s.transform_active) {
    if (both_middle) {
      cmds.emplace_back(TransformUpdate{points[0], points[1]});
      return out;
    }
    s.transform_active = false;
    cmds.emplace_back(TransformEnd{});
  }

  for (std::size_t k = 0; k < 2; ++k) {
    auto &h = s.hands[k];
    const HandSide side = inputs[k]->hand;
    if (h.grab_active) {
      if (h.index.stable) {
        cmds.emplace_back(GrabUpdate{side, points[k]});
      } else {
        h.grab_active = false;
        cmds.emplace_back(GrabEnd{side});
      }
    } else if (edges[k].index_rose) {
      h.grab_active = true;
      cmds.emplace_back(GrabBegin{side, points[k]});
    }
  }
  return out;
}

GestureStep release_hand(const GestureState &state, HandSide hand) {
  GestureStep out{state, {}};
  auto &s = out.state;
  auto &h = s.hand(hand);
  h.index = {};
  h.middle = {};
  // The next source for this hand starts its own clock.
  h.seen = false;
  h.last_timestamp_ms = 0;
  if (s.transform_active) {
    s.transform_active = false;
    out.commands.emplace_back(TransformEnd{});
  }
  if (h.grab_active) {
    h.grab_active = false;
    out.commands.emplace_back(GrabEnd{hand});
  }
  return out;
}

std::vector<GestureCommand> replay_inputs(const std::vector<InputFrame> &stream, const HandOffsets &offsets,
                                          const GestureConfig &config) {
  std::vector<GestureCommand> all;
  GestureState state;
  for (const auto &frame : stream) {
    auto step = gesture_step(state, frame[0], frame[1], offsets, config);
    state = std::move(step.state);
    all.insert(all.end(), step.commands.begin(), step.commands.end());
  }
  return all;
}

SessionFormatError::SessionFormatError(std::size_t line, const std::string &what)
    : std::runtime_error("session line " + std::to_string(line) + ": " + what), line_(line) {}

std::string format_hand_input(const HandInput &in) {
  const auto &p = in.pose.position;
  const auto &q = in.pose.orientation;
  char buf[320];
  std::snprintf(buf, sizeof buf, "%lld,%c,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d",
                static_cast<long long>(in.timestamp_ms), hand_code(in.hand), p.x, p.y, p.z, q.w(), q.x(), q.y(),
                q.z(), in.pinch_index ? 1 : 0, in.pinch_middle ? 1 : 0);
  return buf;
}

HandInput parse_hand_input(const std::string &line, std::size_t lineno) {
  std::vector<std::string_view> fields;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    fields.push_back(rest.substr(0, comma));
    if (comma == std::string_view::npos) {
      break;
    }
    rest.remove_prefix(comma + 1);
  }
  if (fields.size() != 11) {
    throw SessionFormatError(lineno, "expected 11 comma-separated fields, got " + std::to_string(fields.size()));
  }
  for (auto &f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) {
      f.remove_prefix(1);
    }
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
      f.remove_suffix(1);
    }
  }

  HandInput in;
  {
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), in.timestamp_ms);
    if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size()) {
      throw SessionFormatError(lineno, "t_ms must be an integer");
    }
  }
  const auto hand = parse_hand(fields[1]);
  if (!hand) {
    throw SessionFormatError(lineno, "hand must be L or R");
  }
  in.hand = *hand;

  std::array<double, 7> v{};
  for (std::size_t k = 0; k < 7; ++k) {
    const auto f = fields[2 + k];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
    if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v[k])) {
      throw SessionFormatError(lineno, "field " + std::to_string(3 + k) + " is not a finite number");
    }
  }
  in.pose.position = {v[0], v[1], v[2]};
  try {
    in.pose.orientation = Rotation::from_components(v[3], v[4], v[5], v[6]);
  } catch (const std::invalid_argument &) {
    throw SessionFormatError(lineno, "rotation quaternion is zero");
  }

  auto parse_bit = [&](std::string_view f, const char *name) {
    if (f == "0") {
      return false;
    }
    if (f == "1") {
      return true;
    }
    throw SessionFormatError(lineno, std::string(name) + " must be 0 or 1");
  };
  in.pinch_index = parse_bit(fields[9], "idx");
  in.pinch_middle = parse_bit(fields[10], "mid");
  return in;
}

void write_session(std::ostream &out, const std::vector<InputFrame> &stream) {
  for (const auto &frame : stream) {
    out << format_hand_input(frame[0]) << '\n' << format_hand_input(frame[1]) << '\n';
  }
}

std::vector<InputFrame> read_session(std::istream &in) {
  std::vector<InputFrame> stream;
  std::optional<HandInput> pending;
  std::size_t pending_line = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    auto input = parse_hand_input(line, lineno);
    if (!pending) {
      pending = input;
      pending_line = lineno;
      continue;
    }
    if (pending->hand == input.hand) {
      throw SessionFormatError(lineno, "step has two inputs for the same hand");
    }
    InputFrame frame{*pending, input};
    if (frame[0].hand != HandSide::Left) {
      std::swap(frame[0], frame[1]);
    }
    stream.push_back(frame);
    pending.reset();
  }
  if (pending) {
    throw SessionFormatError(pending_line, "unpaired hand input at end of session");
  }
  return stream;
}

} // namespace mudra
