#include "mudra/net/client.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace mudra::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

ServerError::ServerError(ErrorMsg msg) : std::runtime_error(to_string(msg.code) + ": " + msg.detail), msg_(std::move(msg)) {}

struct Client::Impl {
  asio::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  beast::flat_buffer buffer;
};

Client::Client(const std::string &host, unsigned short port) : impl_(std::make_unique<Impl>()) {
  try {
    tcp::resolver resolver(impl_->ioc);
    const auto results = resolver.resolve(host, std::to_string(port));
    asio::connect(impl_->ws.next_layer(), results.begin(), results.end());
    impl_->ws.next_layer().set_option(tcp::no_delay(true));
    impl_->ws.text(true);
    impl_->ws.handshake(host + ":" + std::to_string(port), "/");
  } catch (const boost::system::system_error &e) {
    throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port) + ": " + e.what());
  }
}

Client::~Client() {
  beast::error_code ignored;
  impl_->ws.next_layer().close(ignored);
}

Welcome Client::hello(const std::string &name, std::vector<HandSide> hands, int version) {
  send(Hello{version, name, std::move(hands)});
  Message reply = receive();
  if (auto *err = std::get_if<ErrorMsg>(&reply)) {
    throw ServerError(*err);
  }
  if (auto *w = std::get_if<Welcome>(&reply)) {
    return std::move(*w);
  }
  throw std::runtime_error("server did not answer hello with welcome");
}

void Client::send(const Message &msg) { send_text(encode(msg)); }

void Client::send_text(const std::string &text) {
  try {
    impl_->ws.write(asio::buffer(text));
  } catch (const boost::system::system_error &e) {
    throw std::runtime_error(std::string("send failed: ") + e.what());
  }
}

std::string Client::receive_text() {
  try {
    impl_->ws.read(impl_->buffer);
  } catch (const boost::system::system_error &e) {
    throw std::runtime_error(std::string("connection lost: ") + e.what());
  }
  std::string text = beast::buffers_to_string(impl_->buffer.data());
  impl_->buffer.consume(impl_->buffer.size());
  return text;
}

Message Client::receive() { return decode(receive_text()); }

void Client::close() {
  beast::error_code ec;
  impl_->ws.close(websocket::close_code::normal, ec);
  // Drain until the server's close frame arrives.
  while (!ec) {
    impl_->ws.read(impl_->buffer, ec);
    impl_->buffer.consume(impl_->buffer.size());
  }
}

void Client::abort() {
  beast::error_code ignored;
  auto &sock = impl_->ws.next_layer();
  sock.set_option(asio::socket_base::linger(true, 0), ignored);
  sock.close(ignored);
}

} // namespace mudra::net
