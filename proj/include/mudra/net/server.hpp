#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mudra/md/topology.hpp"
#include "mudra/net/session.hpp"

namespace mudra::net {

struct ServerConfig {
  std::string address = "127.0.0.1";
  /// 0 picks a free port; see Server::port().
  unsigned short port = 9876;
  md::Topology topology = md::build_chain(md::kDefaultChainLength);
  std::vector<Vec3> initial_positions = md::zigzag_chain(md::kDefaultChainLength);
  SessionConfig session;
  /// Tick only once every claimed hand has sent a new input, instead of on
  /// the wall clock. Makes a session reproducible from its input stream.
  bool lockstep = false;
  /// Session file receiving the inputs of every tick; empty disables.
  std::string record_path;
  /// A client with this many unsent messages is disconnected.
  std::size_t max_send_queue = 4096;
};

struct ServerStats {
  std::uint64_t frames = 0;
  std::uint64_t resets = 0;
  std::uint64_t clients_accepted = 0;
  std::uint64_t clients_dropped = 0;
  std::uint64_t malformed_messages = 0;
  std::uint64_t hands_released = 0;
  /// Largest number of ticks between a client disconnecting and its hands
  /// being released in the simulation.
  std::uint64_t max_release_lag_ticks = 0;
};

/// WebSocket front end around a SimulationSession: one network thread runs
/// all connections, one simulation thread ticks and broadcasts frames.
class Server {
public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server &) = delete;
  Server &operator=(const Server &) = delete;

  /// Binds and starts both threads. Throws std::runtime_error if the
  /// address cannot be bound.
  void start();
  /// Stops both threads and closes every connection. Idempotent.
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  unsigned short port() const;
  ServerStats stats() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace mudra::net
