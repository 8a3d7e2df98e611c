#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmforge/wire.hpp"

namespace swarmforge::net {

class NetError : public std::runtime_error {
 public:
  explicit NetError(const std::string& what) : std::runtime_error(what) {}
};

// Thin RAII wrapper over a connected TCP socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close(); }
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;

  static Socket connect(const std::string& host, std::uint16_t port);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  void send_all(const std::vector<std::uint8_t>& bytes);
  // One length-prefixed frame; nullopt on clean EOF before the prefix.
  std::optional<std::string> recv_frame_payload();

 private:
  int fd_ = -1;
};

class Listener {
 public:
  Listener(const std::string& bind_host, std::uint16_t port);
  ~Listener() { close(); }
  Listener(const Listener&) = delete;

  // Port actually bound (useful with port 0).
  std::uint16_t port() const { return port_; }
  // Blocks; invalid Socket after close() from another thread.
  Socket accept();
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// One request/response exchange on an established connection.
wire::ResponseEnvelope roundtrip(Socket& sock, const wire::CommandEnvelope& cmd);

}  // namespace swarmforge::net
