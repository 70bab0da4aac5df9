#include <gtest/gtest.h>

#include <random>

#include "mudra/md/topology.hpp"
#include "mudra/net/protocol.hpp"

using namespace mudra;
using namespace mudra::net;

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double real(double lo = -1e3, double hi = 1e3) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::uint64_t count(std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(0, hi)(rng); }
  bool coin() { return count(1) == 1; }
  Vec3 vec() { return {real(), real(), real()}; }
  HandSide hand() { return coin() ? HandSide::Left : HandSide::Right; }

  Rotation rot() {
    std::normal_distribution<double> n;
    return Rotation::from_components(n(rng), n(rng), n(rng), n(rng));
  }

  std::string text() {
    static const std::string alphabet = "abcXYZ 019_-\"\\/\n\t{}[]:,\xc3\xa9";
    std::string s;
    for (std::uint64_t i = count(12); i > 0; --i) {
      s += alphabet[count(alphabet.size() - 1)];
    }
    // Keep the two-byte UTF-8 sequence intact.
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '\xc3' || s[i] == '\xa9') {
        out += "\xc3\xa9";
      } else {
        out += s[i];
      }
    }
    return out;
  }

  Message message() {
    switch (count(4)) {
    case 0: {
      Hello m;
      m.version = static_cast<int>(count(5));
      m.name = text();
      const auto k = count(3);
      if (k == 1) {
        m.hands = {hand()};
      } else if (k == 2) {
        m.hands = {HandSide::Left, HandSide::Right};
      } else if (k == 3) {
        m.hands = {HandSide::Right, HandSide::Left};
      }
      return m;
    }
    case 1: {
      md::ChainParams p;
      p.r0 = real(0.5, 2.0);
      p.k_bond = real(1, 500);
      p.theta0 = real(0.5, 3.1);
      p.k_theta = real(0, 50);
      p.mass = real(0.1, 10);
      Welcome m{md::build_chain(2 + count(20), p), static_cast<int>(1 + count(120))};
      return m;
    }
    case 2: {
      HandInput m;
      m.hand = hand();
      m.timestamp_ms = static_cast<std::int64_t>(count(1ULL << 40));
      m.pose = {vec(), rot()};
      m.pinch_index = coin();
      m.pinch_middle = coin();
      return m;
    }
    case 3: {
      Frame m;
      m.id = count(1ULL << 50);
      m.time = real(0, 1e6);
      for (std::uint64_t i = count(60); i > 0; --i) {
        m.positions.push_back(vec());
      }
      m.potential_energy = real();
      m.kinetic_energy = real(0, 1e3);
      m.transform = {real(1e-3, 1e3), rot(), vec()};
      for (std::uint64_t i = count(2); i > 0; --i) {
        m.grabs.push_back({hand(), count(100), vec()});
      }
      return m;
    }
    default: {
      static const ErrorCode codes[] = {ErrorCode::Version, ErrorCode::HandTaken, ErrorCode::SimReset,
                                        ErrorCode::Malformed};
      return ErrorMsg{codes[count(3)], text()};
    }
    }
  }
};

std::string field_of(const std::string &text) {
  try {
    decode(text);
  } catch (const DecodeError &e) {
    return e.field();
  }
  return "<decoded>";
}

} // namespace

TEST(Protocol, RandomRoundTrips) {
  Gen g(17);
  std::array<int, 5> seen{};
  for (int i = 0; i < 1000; ++i) {
    const Message m = g.message();
    ++seen[m.index()];
    const auto text = encode(m);
    ASSERT_EQ(decode(text), m) << text;
    ASSERT_EQ(encode(decode(text)), text);
  }
  for (int c : seen) {
    EXPECT_GT(c, 100);
  }
}

TEST(Protocol, WireShapeOfInput) {
  HandInput in;
  in.hand = HandSide::Right;
  in.timestamp_ms = 1234;
  in.pose.position = {0.5, -1.0, 2.0};
  in.pinch_index = true;
  EXPECT_EQ(encode(in), R"({"hand":"R","idx":1,"mid":0,"pos":[0.5,-1.0,2.0],"rot":[1.0,0.0,0.0,0.0],"t":1234,)"
                        R"("type":"input"})");
  const auto back = std::get<HandInput>(
      decode(R"({"type":"input","t":5,"hand":"L","pos":[1,2,3],"rot":[1,0,0,0],"idx":0,"mid":1})"));
  EXPECT_EQ(back.hand, HandSide::Left);
  EXPECT_EQ(back.timestamp_ms, 5);
  EXPECT_EQ(back.pose.position, (Vec3{1, 2, 3}));
  EXPECT_TRUE(back.pinch_middle);
  EXPECT_FALSE(back.pinch_index);
}

TEST(Protocol, WelcomeCarriesTopologySections) {
  const auto text = encode(Welcome{md::build_chain(3), 30});
  const auto j = text.find(R"("angles":[[0,1,2,)");
  EXPECT_NE(j, std::string::npos) << text;
  EXPECT_NE(text.find(R"("atoms":[[0,1.0],[1,1.0],[2,1.0]])"), std::string::npos) << text;
  EXPECT_NE(text.find(R"("frame_rate":30)"), std::string::npos);
}

TEST(Protocol, TruncatedFrameIsRejected) {
  Frame f;
  f.id = 9;
  f.positions = {{1, 2, 3}, {4, 5, 6}};
  f.grabs = {{HandSide::Left, 1, {0, 0, 1}}};
  const auto text = encode(f);
  for (std::size_t n = 0; n < text.size(); ++n) {
    EXPECT_THROW(decode(text.substr(0, n)), DecodeError) << n;
  }
  EXPECT_EQ(field_of(text.substr(0, text.size() / 2)), "json");
}

TEST(Protocol, BadFieldsAreNamed) {
  const std::string input = R"({"type":"input","t":5,"hand":"X","pos":[1,2,3],"rot":[1,0,0,0],"idx":0,"mid":1})";
  EXPECT_EQ(field_of(input), "hand");
  EXPECT_EQ(field_of(R"({"type":"input","t":5,"hand":"L","pos":[1,2],"rot":[1,0,0,0],"idx":0,"mid":1})"), "pos");
  EXPECT_EQ(field_of(R"({"type":"input","t":5,"hand":"L","pos":[1,2,3],"rot":[0,0,0,0],"idx":0,"mid":1})"), "rot");
  EXPECT_EQ(field_of(R"({"type":"input","t":5,"hand":"L","pos":[1,2,3],"rot":[1,0,0,0],"idx":2,"mid":1})"), "idx");
  EXPECT_EQ(field_of(R"({"type":"input","t":5.5,"hand":"L","pos":[1,2,3],"rot":[1,0,0,0],"idx":0,"mid":1})"), "t");
  EXPECT_EQ(field_of(R"({"type":"input","hand":"L","pos":[1,2,3],"rot":[1,0,0,0],"idx":0,"mid":1})"), "t");
  EXPECT_EQ(field_of(R"({"type":"hello","version":1,"name":"a","hands":["L","L"]})"), "hands");
  EXPECT_EQ(field_of(R"({"type":"hello","version":1,"name":7,"hands":[]})"), "name");
  EXPECT_EQ(field_of(R"({"type":"goodbye"})"), "type");
  EXPECT_EQ(field_of(R"({"version":1})"), "type");
  EXPECT_EQ(field_of(R"([1,2,3])"), "json");
  EXPECT_EQ(field_of(R"({"type":"error","code":"OOPS","detail":""})"), "code");
  EXPECT_EQ(field_of(R"({"type":"frame","id":-1,"time":0,"pos":[],"pe":0,"ke":0,)"
                     R"("xform":{"s":1,"r":[1,0,0,0],"t":[0,0,0]},"grabs":[]})"),
            "id");
  EXPECT_EQ(field_of(R"({"type":"frame","id":1,"time":0,"pos":[],"pe":0,"ke":0,)"
                     R"("xform":{"s":0,"r":[1,0,0,0],"t":[0,0,0]},"grabs":[]})"),
            "xform.s");
  EXPECT_EQ(field_of(R"({"type":"frame","id":1,"time":0,"pos":[],"pe":0,"ke":0,)"
                     R"("xform":{"s":1,"r":[1,0,0,0],"t":[0,0,0]},"grabs":[{"hand":"L","atom":"a","target":[0,0,0]}]})"),
            "grabs.atom");
  EXPECT_EQ(field_of(R"({"type":"welcome","frame_rate":30,"topology":{"atoms":[[0,1],[1,1]],)"
                     R"("bonds":[[0,5,1,1]],"angles":[],"lj":[1,1,2.5]}})"),
            "topology");
}

TEST(Protocol, HelloAllowsObserversAndBothHands) {
  const auto obs = std::get<Hello>(decode(R"({"type":"hello","version":1,"name":"watcher","hands":[]})"));
  EXPECT_TRUE(obs.hands.empty());
  const auto both = std::get<Hello>(decode(R"({"type":"hello","version":1,"name":"g","hands":["R","L"]})"));
  EXPECT_EQ(both.hands, (std::vector<HandSide>{HandSide::Right, HandSide::Left}));
}

TEST(Protocol, NonUnitQuaternionIsNormalizedOnDecode) {
  const auto in = std::get<HandInput>(
      decode(R"({"type":"input","t":0,"hand":"L","pos":[0,0,0],"rot":[2,0,0,0],"idx":0,"mid":0})"));
  EXPECT_EQ(in.pose.orientation, Rotation::identity());
}
