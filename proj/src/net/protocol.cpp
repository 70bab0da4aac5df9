#include "mudra/net/protocol.hpp"

#include <json.hpp>

namespace mudra::net {

using nlohmann::json;

namespace {

json vec_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

json rot_json(const Rotation &r) { return json::array({r.w(), r.x(), r.y(), r.z()}); }

std::string hand_json(HandSide h) { return std::string(1, hand_code(h)); }

const json &field(const json &obj, const char *name) {
  const auto it = obj.find(name);
  if (it == obj.end()) {
    throw DecodeError(name, "missing");
  }
  return *it;
}

double number(const json &j, const std::string &name) {
  if (!j.is_number()) {
    throw DecodeError(name, "expected a number");
  }
  return j.get<double>();
}

std::int64_t integer(const json &j, const std::string &name) {
  if (!j.is_number_integer()) {
    throw DecodeError(name, "expected an integer");
  }
  return j.get<std::int64_t>();
}

std::uint64_t index(const json &j, const std::string &name) {
  if (!j.is_number_unsigned()) {
    throw DecodeError(name, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

const std::string &text(const json &j, const std::string &name) {
  if (!j.is_string()) {
    throw DecodeError(name, "expected a string");
  }
  return j.get_ref<const std::string &>();
}

const json &array(const json &j, const std::string &name, std::size_t exact = 0) {
  if (!j.is_array()) {
    throw DecodeError(name, "expected an array");
  }
  if (exact != 0 && j.size() != exact) {
    throw DecodeError(name, "expected " + std::to_string(exact) + " elements");
  }
  return j;
}

Vec3 vec(const json &j, const std::string &name) {
  const auto &a = array(j, name, 3);
  return {number(a[0], name), number(a[1], name), number(a[2], name)};
}

Rotation rot(const json &j, const std::string &name) {
  const auto &a = array(j, name, 4);
  try {
    return Rotation::from_components(number(a[0], name), number(a[1], name), number(a[2], name),
                                     number(a[3], name));
  } catch (const std::invalid_argument &e) {
    throw DecodeError(name, e.what());
  }
}

HandSide hand(const json &j, const std::string &name) {
  const auto h = parse_hand(text(j, name));
  if (!h) {
    throw DecodeError(name, "expected \"L\" or \"R\"");
  }
  return *h;
}

bool flag(const json &j, const std::string &name) {
  const auto v = integer(j, name);
  if (v != 0 && v != 1) {
    throw DecodeError(name, "expected 0 or 1");
  }
  return v == 1;
}

json topology_json(const md::Topology &top) {
  json atoms = json::array();
  for (std::size_t i = 0; i < top.masses.size(); ++i) {
    atoms.push_back(json::array({i, top.masses[i]}));
  }
  json bonds = json::array();
  for (const auto &b : top.bonds) {
    bonds.push_back(json::array({b.i, b.j, b.r0, b.k}));
  }
  json angles = json::array();
  for (const auto &a : top.angles) {
    angles.push_back(json::array({a.i, a.j, a.k, a.theta0, a.k_theta}));
  }
  return {{"atoms", atoms},
          {"bonds", bonds},
          {"angles", angles},
          {"lj", json::array({top.lj.epsilon, top.lj.sigma, top.lj.cutoff})}};
}

md::Topology topology_from(const json &j) {
  if (!j.is_object()) {
    throw DecodeError("topology", "expected an object");
  }
  md::Topology top;
  const auto &atoms = array(field(j, "atoms"), "topology.atoms");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto &row = array(atoms[i], "topology.atoms", 2);
    if (index(row[0], "topology.atoms") != i) {
      throw DecodeError("topology.atoms", "atom indices must run 0..n-1 in order");
    }
    top.masses.push_back(number(row[1], "topology.atoms"));
  }
  for (const auto &row : array(field(j, "bonds"), "topology.bonds")) {
    const auto &r = array(row, "topology.bonds", 4);
    top.bonds.push_back(
        {index(r[0], "topology.bonds"), index(r[1], "topology.bonds"), number(r[2], "topology.bonds"),
         number(r[3], "topology.bonds")});
  }
  for (const auto &row : array(field(j, "angles"), "topology.angles")) {
    const auto &r = array(row, "topology.angles", 5);
    top.angles.push_back({index(r[0], "topology.angles"), index(r[1], "topology.angles"),
                          index(r[2], "topology.angles"), number(r[3], "topology.angles"),
                          number(r[4], "topology.angles")});
  }
  const auto &lj = array(field(j, "lj"), "topology.lj", 3);
  top.lj = {number(lj[0], "topology.lj"), number(lj[1], "topology.lj"), number(lj[2], "topology.lj")};
  top.derive_exclusions();
  try {
    top.validate();
  } catch (const md::TopologyError &e) {
    throw DecodeError("topology", e.what());
  }
  return top;
}

struct Encoder {
  json operator()(const Hello &m) const {
    json hands = json::array();
    for (auto h : m.hands) {
      hands.push_back(hand_json(h));
    }
    return {{"type", "hello"}, {"version", m.version}, {"name", m.name}, {"hands", hands}};
  }
  json operator()(const Welcome &m) const {
    return {{"type", "welcome"}, {"topology", topology_json(m.topology)}, {"frame_rate", m.frame_rate}};
  }
  json operator()(const HandInput &m) const {
    return {{"type", "input"},
            {"t", m.timestamp_ms},
            {"hand", hand_json(m.hand)},
            {"pos", vec_json(m.pose.position)},
            {"rot", rot_json(m.pose.orientation)},
            {"idx", m.pinch_index ? 1 : 0},
            {"mid", m.pinch_middle ? 1 : 0}};
  }
  json operator()(const Frame &m) const {
    json pos = json::array();
    for (const auto &p : m.positions) {
      pos.push_back(vec_json(p));
    }
    json grabs = json::array();
    for (const auto &g : m.grabs) {
      grabs.push_back({{"hand", hand_json(g.hand)}, {"atom", g.atom}, {"target", vec_json(g.target)}});
    }
    return {{"type", "frame"},
            {"id", m.id},
            {"time", m.time},
            {"pos", pos},
            {"pe", m.potential_energy},
            {"ke", m.kinetic_energy},
            {"xform",
             {{"s", m.transform.scale}, {"r", rot_json(m.transform.rotation)}, {"t", vec_json(m.transform.translation)}}},
            {"grabs", grabs}};
  }
  json operator()(const ErrorMsg &m) const {
    return {{"type", "error"}, {"code", to_string(m.code)}, {"detail", m.detail}};
  }
};

Hello decode_hello(const json &j) {
  Hello m;
  m.version = static_cast<int>(integer(field(j, "version"), "version"));
  m.name = text(field(j, "name"), "name");
  for (const auto &h : array(field(j, "hands"), "hands")) {
    m.hands.push_back(hand(h, "hands"));
  }
  if (m.hands.size() == 2 && m.hands[0] == m.hands[1]) {
    throw DecodeError("hands", "hand listed twice");
  }
  if (m.hands.size() > 2) {
    throw DecodeError("hands", "at most two hands");
  }
  return m;
}

Welcome decode_welcome(const json &j) {
  Welcome m;
  m.topology = topology_from(field(j, "topology"));
  m.frame_rate = static_cast<int>(integer(field(j, "frame_rate"), "frame_rate"));
  if (m.frame_rate <= 0) {
    throw DecodeError("frame_rate", "must be positive");
  }
  return m;
}

HandInput decode_input(const json &j) {
  HandInput m;
  m.timestamp_ms = integer(field(j, "t"), "t");
  m.hand = hand(field(j, "hand"), "hand");
  m.pose.position = vec(field(j, "pos"), "pos");
  m.pose.orientation = rot(field(j, "rot"), "rot");
  m.pinch_index = flag(field(j, "idx"), "idx");
  m.pinch_middle = flag(field(j, "mid"), "mid");
  return m;
}

Frame decode_frame(const json &j) {
  Frame m;
  m.id = index(field(j, "id"), "id");
  m.time = number(field(j, "time"), "time");
  for (const auto &p : array(field(j, "pos"), "pos")) {
    m.positions.push_back(vec(p, "pos"));
  }
  m.potential_energy = number(field(j, "pe"), "pe");
  m.kinetic_energy = number(field(j, "ke"), "ke");
  const auto &x = field(j, "xform");
  if (!x.is_object()) {
    throw DecodeError("xform", "expected an object");
  }
  m.transform.scale = number(field(x, "s"), "xform.s");
  if (!(m.transform.scale > 0.0)) {
    throw DecodeError("xform.s", "scale must be positive");
  }
  m.transform.rotation = rot(field(x, "r"), "xform.r");
  m.transform.translation = vec(field(x, "t"), "xform.t");
  for (const auto &g : array(field(j, "grabs"), "grabs")) {
    if (!g.is_object()) {
      throw DecodeError("grabs", "expected an object");
    }
    m.grabs.push_back({hand(field(g, "hand"), "grabs.hand"), index(field(g, "atom"), "grabs.atom"),
                       vec(field(g, "target"), "grabs.target")});
  }
  return m;
}

ErrorMsg decode_error(const json &j) {
  ErrorMsg m;
  const auto &code = text(field(j, "code"), "code");
  if (code == "VERSION") {
    m.code = ErrorCode::Version;
  } else if (code == "HAND_TAKEN") {
    m.code = ErrorCode::HandTaken;
  } else if (code == "SIM_RESET") {
    m.code = ErrorCode::SimReset;
  } else if (code == "MALFORMED") {
    m.code = ErrorCode::Malformed;
  } else {
    throw DecodeError("code", "unknown error code \"" + code + "\"");
  }
  m.detail = text(field(j, "detail"), "detail");
  return m;
}

} // namespace

DecodeError::DecodeError(std::string field, const std::string &why)
    : std::runtime_error("field `" + field + "`: " + why), field_(std::move(field)) {}

std::string to_string(ErrorCode c) {
  switch (c) {
  case ErrorCode::Version:
    return "VERSION";
  case ErrorCode::HandTaken:
    return "HAND_TAKEN";
  case ErrorCode::SimReset:
    return "SIM_RESET";
  case ErrorCode::Malformed:
    return "MALFORMED";
  }
  return "MALFORMED";
}

std::string encode(const Message &msg) { return std::visit(Encoder{}, msg).dump(); }

Message decode(std::string_view text_in) {
  json j = json::parse(text_in, nullptr, false);
  if (j.is_discarded()) {
    throw DecodeError("json", "not valid JSON");
  }
  if (!j.is_object()) {
    throw DecodeError("json", "expected an object");
  }
  const auto &type = text(field(j, "type"), "type");
  if (type == "hello") {
    return decode_hello(j);
  }
  if (type == "welcome") {
    return decode_welcome(j);
  }
  if (type == "input") {
    return decode_input(j);
  }
  if (type == "frame") {
    return decode_frame(j);
  }
  if (type == "error") {
    return decode_error(j);
  }
  throw DecodeError("type", "unknown message type \"" + type + "\"");
}

} // namespace mudra::net
