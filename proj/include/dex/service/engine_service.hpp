#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dex/service/protocol.hpp"

namespace dex::service {

// Outbound queue of one client: a reliable FIFO for replies, events, metrics and
// haptic pulses, plus a single snapshot slot. A new snapshot replaces an unsent
// one, so a stalled reader costs at most one pending snapshot.
class Outbox {
 public:
  void push(std::string message);
  void put_snapshot(std::string message);
  // Reliable messages first, then the pending snapshot.
  std::optional<std::string> pop();

  std::size_t pending() const;
  std::size_t dropped_snapshots() const;

  // Called after every push or snapshot, outside the lock, from the pushing thread.
  void set_notify(std::function<void()> notify);

 private:
  void wake();

  mutable std::mutex mutex_;
  std::deque<std::string> reliable_;
  std::optional<std::string> snapshot_;
  std::size_t dropped_ = 0;
  std::function<void()> notify_;
};

struct ServiceConfig {
  engine::EngineConfig engine;
  InputMode input = InputMode::Poses;
  // Every record the engine consumes is appended here in replay format.
  std::string record_path;
  std::chrono::microseconds tick_period{10'000};
};

// Haptic pulse shapes.
inline constexpr double kGraspPulseAmplitude = 0.5;
inline constexpr int kGraspPulseMs = 40;
inline constexpr double kDropPulseAmplitude = 1.0;
inline constexpr int kDropPulseMs = 150;

// The engine thread and its two queues. Connection handlers call attach, detach
// and submit from any thread; everything else belongs to the engine thread, or
// to the caller while the thread is not running.
class EngineService {
 public:
  explicit EngineService(ServiceConfig config);
  ~EngineService();
  EngineService(const EngineService&) = delete;
  EngineService& operator=(const EngineService&) = delete;

  const ProtocolContext& context() const { return context_; }

  void attach(std::shared_ptr<Outbox> client);
  void detach(std::shared_ptr<Outbox> client);
  void submit(std::shared_ptr<Outbox> from, EngineInput input);

  // Drains the inbound queue and runs one tick.
  void step();

  // Runs step() on a dedicated thread at the tick period until stop().
  void start();
  void stop();
  bool running() const { return thread_.joinable(); }

  // Wall-clock start of the first kMaxTickTimes ticks run by the thread.
  static constexpr std::size_t kMaxTickTimes = 100'000;
  const std::vector<std::chrono::steady_clock::time_point>& tick_times() const {
    return tick_times_;
  }
  std::int64_t ticks() const { return ticks_.load(); }
  const engine::Engine& engine() const { return engine_; }

 private:
  struct Attach {
    std::shared_ptr<Outbox> client;
  };
  struct Detach {
    std::shared_ptr<Outbox> client;
  };
  struct Submit {
    std::shared_ptr<Outbox> from;
    EngineInput input;
  };
  using Item = std::variant<Attach, Detach, Submit>;

  void observe(const engine::TickSummary& summary);
  void broadcast(const std::string& message);
  void consume(std::shared_ptr<Outbox> from, EngineInput input);
  void push_record(const io::ReplayRecord& record);
  void run();

  ServiceConfig config_;
  ProtocolContext context_;
  engine::Engine engine_;
  std::ofstream record_;

  std::mutex inbound_mutex_;
  std::vector<Item> inbound_;

  // Engine thread only.
  std::vector<std::shared_ptr<Outbox>> clients_;
  // Raw records waiting for their tick, in time order.
  std::multimap<std::int64_t, std::pair<std::shared_ptr<Outbox>, io::ReplayRecord>> pending_;
  std::int64_t last_pushed_us_ = 0;
  task::Phase last_phase_;
  std::map<int, int> released_by_;  // ring -> instrument of its last fall
  std::vector<std::chrono::steady_clock::time_point> tick_times_;

  std::atomic<std::int64_t> ticks_{0};
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

}  // namespace dex::service
