#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "dex/service/engine_service.hpp"

namespace dex::service {

struct ServerConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  // Static files for plain HTTP requests; empty answers them with 404.
  std::string ui_dir;
  std::chrono::milliseconds ping_interval{5000};
  int max_missed_pings = 3;
};

// WebSocket endpoint /session plus static file serving on one port, driven by a
// single I/O thread. Connection handlers translate frames to messages and
// exchange them with the EngineService; they never touch the engine.
class Server {
 public:
  Server(EngineService& service, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts the I/O thread. Throws Error when the port cannot be bound.
  void start();
  void stop();
  std::uint16_t port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dex::service
