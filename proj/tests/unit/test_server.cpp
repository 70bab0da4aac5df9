#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mudra/net/client.hpp"
#include "mudra/net/server.hpp"

using namespace mudra;
using namespace mudra::net;

namespace {

ServerConfig small_config(bool lockstep = false) {
  ServerConfig cfg;
  cfg.port = 0;
  cfg.topology = md::build_chain(8);
  cfg.initial_positions = md::zigzag_chain(8);
  cfg.session.integrator.langevin = md::LangevinParams{0.5, 1.0, 11};
  cfg.lockstep = lockstep;
  return cfg;
}

HandInput input(HandSide h, std::int64_t t, bool idx, Vec3 pos = {}) {
  HandInput in;
  in.hand = h;
  in.timestamp_ms = t;
  in.pinch_index = idx;
  in.pose.position = pos;
  return in;
}

// Next frame, skipping other messages.
Frame next_frame(Client &c) {
  while (true) {
    auto m = c.receive();
    if (auto *f = std::get_if<Frame>(&m)) {
      return std::move(*f);
    }
  }
}

ErrorMsg next_error(Client &c) {
  while (true) {
    auto m = c.receive();
    if (auto *e = std::get_if<ErrorMsg>(&m)) {
      return std::move(*e);
    }
  }
}

} // namespace

TEST(Server, IdleServerStreamsFramesToObservers) {
  Server server(small_config());
  server.start();
  Client c("127.0.0.1", server.port());
  const auto w = c.hello("watcher", {});
  EXPECT_EQ(w.topology, md::build_chain(8));
  EXPECT_EQ(w.frame_rate, 30);
  auto prev = next_frame(c);
  for (int k = 0; k < 20; ++k) {
    const auto f = next_frame(c);
    EXPECT_EQ(f.id, prev.id + 1);
    EXPECT_TRUE(f.grabs.empty());
    EXPECT_EQ(f.transform, Similarity::identity());
    prev = f;
  }
  server.stop();
  EXPECT_GE(server.stats().frames, 21u);
}

TEST(Server, SecondClaimOfAHandIsRefused) {
  Server server(small_config());
  server.start();
  Client first("127.0.0.1", server.port());
  first.hello("first", {HandSide::Left});
  Client second("127.0.0.1", server.port());
  try {
    second.hello("second", {HandSide::Left});
    FAIL() << "expected HAND_TAKEN";
  } catch (const ServerError &e) {
    EXPECT_EQ(e.message().code, ErrorCode::HandTaken);
    EXPECT_NE(e.message().detail.find('L'), std::string::npos);
  }
  const auto a = next_frame(first);
  const auto b = next_frame(first);
  EXPECT_EQ(b.id, a.id + 1);
  // The right hand is still free.
  Client third("127.0.0.1", server.port());
  EXPECT_NO_THROW(third.hello("third", {HandSide::Right}));
}

TEST(Server, VersionMismatchIsRefused) {
  Server server(small_config());
  server.start();
  Client c("127.0.0.1", server.port());
  try {
    c.hello("old", {HandSide::Left}, kProtocolVersion + 1);
    FAIL() << "expected VERSION";
  } catch (const ServerError &e) {
    EXPECT_EQ(e.message().code, ErrorCode::Version);
  }
  EXPECT_THROW(c.receive(), std::runtime_error);
}

TEST(Server, MalformedMessagesAreReportedAndSurvived) {
  Server server(small_config(true));
  server.start();
  Client c("127.0.0.1", server.port());
  c.hello("g", {HandSide::Left});
  c.send_text(R"({"type":"input","t":0,"hand":"X","pos":[0,0,0],"rot":[1,0,0,0],"idx":0,"mid":0})");
  auto e = next_error(c);
  EXPECT_EQ(e.code, ErrorCode::Malformed);
  EXPECT_NE(e.detail.find("`hand`"), std::string::npos) << e.detail;
  c.send(input(HandSide::Right, 0, false));
  EXPECT_EQ(next_error(c).code, ErrorCode::Malformed);
  c.send_text("{not json");
  EXPECT_EQ(next_error(c).code, ErrorCode::Malformed);
  c.send(input(HandSide::Left, 0, false));
  EXPECT_EQ(next_frame(c).id, 0u);
  EXPECT_EQ(server.stats().malformed_messages, 3u);
}

TEST(Server, NoPinchesMeansNoGrabs) {
  Server server(small_config());
  server.start();
  Client c("127.0.0.1", server.port());
  c.hello("both", {HandSide::Left, HandSide::Right});
  for (int k = 0; k < 30; ++k) {
    c.send(input(HandSide::Left, 33 * k, false, {0, 0, 0}));
    c.send(input(HandSide::Right, 33 * k, false, {1, 0, 0}));
    const auto f = next_frame(c);
    EXPECT_TRUE(f.grabs.empty());
    EXPECT_EQ(f.transform, Similarity::identity());
  }
}

TEST(Server, LockstepIsDeterministicAndRecords) {
  const auto dir = std::filesystem::temp_directory_path();
  std::vector<std::vector<Frame>> runs;
  std::vector<InputFrame> sent;
  for (int run = 0; run < 2; ++run) {
    auto cfg = small_config(true);
    cfg.record_path = (dir / ("mudra_server_record_" + std::to_string(run) + ".session")).string();
    Server server(cfg);
    server.start();
    Client c("127.0.0.1", server.port());
    c.hello("agent", {HandSide::Left, HandSide::Right});
    std::vector<Frame> frames;
    sent.clear();
    for (int k = 0; k < 60; ++k) {
      const bool pinch = k >= 10 && k < 40;
      const InputFrame in{input(HandSide::Left, 33 * k, pinch, {0.2, 0.1 * k, 0}),
                          input(HandSide::Right, 33 * k, false, {3, 0, 0})};
      c.send(in[0]);
      c.send(in[1]);
      sent.push_back(in);
      frames.push_back(next_frame(c));
      EXPECT_EQ(frames.back().id, static_cast<std::uint64_t>(k));
    }
    EXPECT_FALSE(frames[20].grabs.empty());
    EXPECT_TRUE(frames[50].grabs.empty());
    c.close();
    server.stop();
    std::ifstream rec(cfg.record_path);
    EXPECT_EQ(read_session(rec), sent);
    runs.push_back(std::move(frames));
  }
  EXPECT_EQ(runs[0], runs[1]);
}

TEST(Server, AbruptDisconnectReleasesGrab) {
  Server server(small_config());
  server.start();
  Client watcher("127.0.0.1", server.port());
  watcher.hello("watcher", {});
  auto grabber = std::make_unique<Client>("127.0.0.1", server.port());
  grabber->hello("grabber", {HandSide::Right});
  const auto start = next_frame(watcher);
  for (int k = 0; k < 10; ++k) {
    grabber->send(input(HandSide::Right, 33 * k, true, start.positions[3]));
    next_frame(watcher);
  }
  Frame f = next_frame(watcher);
  ASSERT_EQ(f.grabs.size(), 1u);
  grabber->abort();
  for (int k = 0; k < 30 && !f.grabs.empty(); ++k) {
    f = next_frame(watcher);
  }
  EXPECT_TRUE(f.grabs.empty());
  const auto stats = server.stats();
  EXPECT_EQ(stats.hands_released, 1u);
  EXPECT_LE(stats.max_release_lag_ticks, 1u);
}

TEST(Server, ClientsReceiveIdenticalFrames) {
  Server server(small_config());
  server.start();
  Client a("127.0.0.1", server.port());
  a.hello("a", {});
  Client b("127.0.0.1", server.port());
  b.hello("b", {});
  auto fa = next_frame(a);
  auto fb = next_frame(b);
  while (fa.id < fb.id) {
    fa = next_frame(a);
  }
  while (fb.id < fa.id) {
    fb = next_frame(b);
  }
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(encode(fa), encode(fb));
    fa = next_frame(a);
    fb = next_frame(b);
  }
}

TEST(Server, BlowupBroadcastsResetAndCheckpoint) {
  auto cfg = small_config();
  cfg.topology = md::build_chain(2);
  cfg.initial_positions = {{0, 0, 0}, {1.3, 0, 0}};
  cfg.session.integrator = {};
  cfg.session.integrator.dt = 0.5;
  Server server(cfg);
  server.start();
  Client c("127.0.0.1", server.port());
  c.hello("w", {});
  const auto err = next_error(c);
  EXPECT_EQ(err.code, ErrorCode::SimReset);
  const auto f = next_frame(c);
  EXPECT_EQ(f.positions, cfg.initial_positions);
}

TEST(Server, BindFailureIsReported) {
  Server a(small_config());
  a.start();
  auto cfg = small_config();
  cfg.port = a.port();
  Server b(cfg);
  EXPECT_THROW(b.start(), std::runtime_error);
  cfg.address = "not-an-address";
  Server c(cfg);
  EXPECT_THROW(c.start(), std::runtime_error);
}
