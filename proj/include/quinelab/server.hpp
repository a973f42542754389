#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "quinelab/session.hpp"

namespace quinelab {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;
  std::shared_ptr<const Catalog> catalog;
  SessionOptions session;
  double tick_seconds = 0.02;
  // Outgoing messages queued on one socket before state events are thinned.
  std::size_t high_water = 64;
  bool handle_signals = false;  // stop on SIGINT/SIGTERM
};

// WebSocket endpoint (any path) speaking the newline-JSON session protocol,
// one Session per connection, plus plain GET of static files. Everything
// runs on one thread.
class Server {
 public:
  // Binds immediately; throws std::runtime_error when it cannot.
  explicit Server(ServerOptions opt);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  void run();
  void stop();  // safe from any thread

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace quinelab
