#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mudra/net/protocol.hpp"

namespace mudra::net {

/// The server answered with an error message.
class ServerError : public std::runtime_error {
public:
  explicit ServerError(ErrorMsg msg);
  const ErrorMsg &message() const { return msg_; }

private:
  ErrorMsg msg_;
};

/// Blocking WebSocket client for the wire protocol. Not thread-safe.
class Client {
public:
  /// Connects and completes the WebSocket handshake. Throws
  /// std::runtime_error on failure.
  Client(const std::string &host, unsigned short port);
  ~Client();
  Client(const Client &) = delete;
  Client &operator=(const Client &) = delete;

  /// Sends hello and waits for the reply; throws ServerError if refused.
  Welcome hello(const std::string &name, std::vector<HandSide> hands, int version = kProtocolVersion);

  void send(const Message &msg);
  void send_text(const std::string &text);
  /// Next message from the server; throws DecodeError on a bad payload and
  /// std::runtime_error once the connection is gone.
  Message receive();
  std::string receive_text();

  /// WebSocket close handshake.
  void close();
  /// Drops the TCP connection without a close handshake.
  void abort();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace mudra::net
