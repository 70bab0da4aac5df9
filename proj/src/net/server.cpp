#include "mudra/net/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

namespace mudra::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct Release {
  HandSide hand;
  std::uint64_t noticed_at_frame;
};

// Shared between the network thread (writers) and the simulation thread.
struct Inbox {
  std::mutex mutex;
  std::condition_variable cv;
  std::array<std::optional<HandInput>, 2> latest;
  std::array<bool, 2> claimed{false, false};
  std::vector<Release> releases;
  bool stopping = false;

  bool ready_for_lockstep() const {
    const bool any = claimed[0] || claimed[1];
    return any && (!claimed[0] || latest[0]) && (!claimed[1] || latest[1]);
  }
};

} // namespace

struct Server::Impl {
  class Connection;

  ServerConfig config;
  SimulationSession session;
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread net_thread;
  std::thread sim_thread;
  Inbox inbox;
  std::atomic<std::uint64_t> next_frame{0};
  std::atomic<bool> started{false};
  std::atomic<bool> stopped{false};
  std::mutex stop_mutex;
  std::condition_variable stop_cv;

  // Network thread only.
  std::set<std::shared_ptr<Connection>> connections;
  std::array<Connection *, 2> owners{nullptr, nullptr};

  mutable std::mutex stats_mutex;
  ServerStats stats;

  explicit Impl(ServerConfig c)
      : config(std::move(c)), session(config.topology, config.initial_positions, config.session) {}

  void count(std::uint64_t ServerStats::*field) {
    std::lock_guard lock(stats_mutex);
    ++(stats.*field);
  }

  void accept();
  void simulate();
  void broadcast(std::shared_ptr<const std::string> text);
  void disconnected(Connection *c);
};

class Server::Impl::Connection : public std::enable_shared_from_this<Connection> {
public:
  Connection(Impl &server, tcp::socket socket) : server_(server), ws_(std::move(socket)) {}

  void run() {
    ws_.text(true);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) {
        self->fail(ec);
        return;
      }
      self->read();
    });
  }

  bool welcomed() const { return welcomed_; }

  void send(std::shared_ptr<const std::string> text) {
    if (closed_) {
      return;
    }
    if (queue_.size() >= server_.config.max_send_queue) {
      spdlog::warn("client '{}' is not keeping up; disconnecting", name_);
      server_.count(&ServerStats::clients_dropped);
      shutdown();
      return;
    }
    queue_.push_back(std::move(text));
    if (!writing_) {
      write();
    }
  }

  // Sends an error then closes once it is written.
  void refuse(ErrorCode code, const std::string &detail) {
    refused_ = true;
    send(std::make_shared<const std::string>(encode(ErrorMsg{code, detail})));
    close_after_write_ = true;
  }

  void shutdown() {
    if (closed_) {
      return;
    }
    closed_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).socket().close(ignored);
    server_.disconnected(this);
  }

  std::vector<HandSide> hands;

private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->fail(ec);
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->handle(text);
      if (!self->closed_) {
        self->read();
      }
    });
  }

  void handle(const std::string &text) {
    if (refused_) {
      return;
    }
    Message msg;
    try {
      msg = decode(text);
    } catch (const DecodeError &e) {
      server_.count(&ServerStats::malformed_messages);
      send(std::make_shared<const std::string>(encode(ErrorMsg{ErrorCode::Malformed, e.what()})));
      return;
    }
    if (!welcomed_) {
      const auto *hello = std::get_if<Hello>(&msg);
      if (!hello) {
        server_.count(&ServerStats::malformed_messages);
        refuse(ErrorCode::Malformed, "expected hello");
        return;
      }
      on_hello(*hello);
      return;
    }
    const auto *in = std::get_if<HandInput>(&msg);
    if (!in) {
      server_.count(&ServerStats::malformed_messages);
      send(std::make_shared<const std::string>(encode(ErrorMsg{ErrorCode::Malformed, "expected input"})));
      return;
    }
    if (server_.owners[hand_index(in->hand)] != this) {
      server_.count(&ServerStats::malformed_messages);
      send(std::make_shared<const std::string>(
          encode(ErrorMsg{ErrorCode::Malformed, std::string("hand ") + hand_code(in->hand) + " is not yours"})));
      return;
    }
    std::lock_guard lock(server_.inbox.mutex);
    server_.inbox.latest[hand_index(in->hand)] = *in;
    server_.inbox.cv.notify_all();
  }

  void on_hello(const Hello &hello) {
    name_ = hello.name;
    if (hello.version != kProtocolVersion) {
      refuse(ErrorCode::Version, "server speaks version " + std::to_string(kProtocolVersion));
      return;
    }
    for (auto h : hello.hands) {
      if (server_.owners[hand_index(h)]) {
        refuse(ErrorCode::HandTaken, std::string("hand ") + hand_code(h) + " is already claimed");
        return;
      }
    }
    hands = hello.hands;
    {
      std::lock_guard lock(server_.inbox.mutex);
      for (auto h : hands) {
        server_.owners[hand_index(h)] = this;
        server_.inbox.claimed[hand_index(h)] = true;
        server_.inbox.latest[hand_index(h)].reset();
      }
    }
    send(std::make_shared<const std::string>(
        encode(Welcome{server_.session.topology(), server_.config.session.frame_rate})));
    welcomed_ = true;
    spdlog::info("client '{}' joined with {} hand(s)", name_, hands.size());
  }

  void write() {
    writing_ = true;
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->fail(ec);
        return;
      }
      self->queue_.pop_front();
      if (self->queue_.empty()) {
        self->writing_ = false;
        if (self->close_after_write_) {
          self->close_after_write_ = false;
          self->ws_.async_close(websocket::close_code::normal,
                                [self](beast::error_code) { self->shutdown(); });
        }
        return;
      }
      self->write();
    });
  }

  void fail(beast::error_code ec) {
    if (!closed_ && ec != websocket::error::closed && ec != asio::error::operation_aborted) {
      spdlog::debug("client '{}': {}", name_, ec.message());
    }
    shutdown();
  }

  Impl &server_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  std::string name_ = "?";
  bool writing_ = false;
  bool welcomed_ = false;
  bool closed_ = false;
  bool close_after_write_ = false;
  bool refused_ = false;
};

void Server::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != asio::error::operation_aborted) {
        spdlog::error("accept failed: {}", ec.message());
      }
      return;
    }
    count(&ServerStats::clients_accepted);
    auto c = std::make_shared<Connection>(*this, std::move(socket));
    connections.insert(c);
    c->run();
    accept();
  });
}

void Server::Impl::disconnected(Connection *c) {
  {
    std::lock_guard lock(inbox.mutex);
    for (auto h : c->hands) {
      if (owners[hand_index(h)] == c) {
        owners[hand_index(h)] = nullptr;
        inbox.claimed[hand_index(h)] = false;
        inbox.latest[hand_index(h)].reset();
        inbox.releases.push_back({h, next_frame.load()});
      }
    }
    inbox.cv.notify_all();
  }
  // Defer the erase: `c` may be running one of its own handlers.
  asio::post(ioc, [this, c] {
    for (auto it = connections.begin(); it != connections.end(); ++it) {
      if (it->get() == c) {
        connections.erase(it);
        break;
      }
    }
  });
}

void Server::Impl::broadcast(std::shared_ptr<const std::string> text) {
  std::vector<std::shared_ptr<Connection>> targets(connections.begin(), connections.end());
  for (auto &c : targets) {
    if (c->welcomed()) {
      c->send(text);
    }
  }
}

void Server::Impl::simulate() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(1.0 / config.session.frame_rate));
  std::ofstream record;
  if (!config.record_path.empty()) {
    record.open(config.record_path);
    if (!record) {
      spdlog::error("cannot open {} for recording", config.record_path);
    }
  }
  auto deadline = clock::now();
  while (true) {
    std::array<std::optional<HandInput>, 2> inputs;
    std::vector<Release> releases;
    {
      std::unique_lock lock(inbox.mutex);
      if (config.lockstep) {
        // Releases alone only force a tick when nobody is left to drive one.
        inbox.cv.wait(lock, [&] {
          return inbox.stopping || inbox.ready_for_lockstep() ||
                 (!inbox.releases.empty() && !inbox.claimed[0] && !inbox.claimed[1]);
        });
      } else {
        deadline += period;
        if (deadline < clock::now() - 10 * period) {
          deadline = clock::now();
        }
        inbox.cv.wait_until(lock, deadline, [&] { return inbox.stopping; });
      }
      if (inbox.stopping) {
        break;
      }
      releases.swap(inbox.releases);
      inputs = inbox.latest;
      inbox.latest = {};
    }

    const std::uint64_t frame_id = session.next_frame_id();
    for (const auto &r : releases) {
      session.release(r.hand);
      std::lock_guard lock(stats_mutex);
      ++stats.hands_released;
      stats.max_release_lag_ticks = std::max(stats.max_release_lag_ticks, frame_id - r.noticed_at_frame);
    }
    TickResult result = session.tick(inputs);
    next_frame.store(session.next_frame_id());
    if (record.is_open()) {
      write_session(record, {session.last_inputs()});
    }

    std::shared_ptr<const std::string> error;
    if (result.reset) {
      spdlog::warn("simulation reset: {}", result.reset->detail);
      error = std::make_shared<const std::string>(encode(*result.reset));
    }
    auto frame = std::make_shared<const std::string>(encode(result.frame));
    {
      std::lock_guard lock(stats_mutex);
      ++stats.frames;
      stats.resets = session.resets();
    }
    asio::post(ioc, [this, error, frame] {
      if (error) {
        broadcast(error);
      }
      broadcast(frame);
    });
  }
}

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

void Server::start() {
  auto &im = *impl_;
  if (im.started) {
    throw std::logic_error("server already started");
  }
  beast::error_code ec;
  const tcp::endpoint ep(asio::ip::make_address(im.config.address, ec), im.config.port);
  if (ec) {
    throw std::runtime_error("bad bind address " + im.config.address + ": " + ec.message());
  }
  im.acceptor.open(ep.protocol(), ec);
  if (!ec) {
    im.acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  }
  if (!ec) {
    im.acceptor.bind(ep, ec);
  }
  if (!ec) {
    im.acceptor.listen(asio::socket_base::max_listen_connections, ec);
  }
  if (ec) {
    throw std::runtime_error("cannot listen on " + im.config.address + ":" + std::to_string(im.config.port) + ": " +
                             ec.message());
  }
  im.started = true;
  im.accept();
  im.net_thread = std::thread([&im] {
    auto guard = asio::make_work_guard(im.ioc);
    im.ioc.run();
  });
  im.sim_thread = std::thread([&im] { im.simulate(); });
  spdlog::info("serving on {}:{}", im.config.address, port());
}

void Server::stop() {
  auto &im = *impl_;
  if (!im.started || im.stopped.exchange(true)) {
    return;
  }
  {
    std::lock_guard lock(im.inbox.mutex);
    im.inbox.stopping = true;
    im.inbox.cv.notify_all();
  }
  im.sim_thread.join();
  asio::post(im.ioc, [&im] {
    beast::error_code ignored;
    im.acceptor.close(ignored);
    std::vector<std::shared_ptr<Impl::Connection>> all(im.connections.begin(), im.connections.end());
    for (auto &c : all) {
      c->shutdown();
    }
    im.ioc.stop();
  });
  im.net_thread.join();
  im.connections.clear();
  {
    std::lock_guard lock(im.stop_mutex);
    im.stop_cv.notify_all();
  }
}

void Server::wait() {
  std::unique_lock lock(impl_->stop_mutex);
  impl_->stop_cv.wait(lock, [&] { return impl_->stopped.load(); });
}

unsigned short Server::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->config.port : ep.port();
}

ServerStats Server::stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stats;
}

} // namespace mudra::net
