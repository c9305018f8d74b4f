#include "dex/service/engine_service.hpp"

#include <algorithm>

namespace dex::service {

void Outbox::push(std::string message) {
  {
    std::lock_guard lock(mutex_);
    reliable_.push_back(std::move(message));
  }
  wake();
}

void Outbox::put_snapshot(std::string message) {
  {
    std::lock_guard lock(mutex_);
    if (snapshot_) {
      ++dropped_;
    }
    snapshot_ = std::move(message);
  }
  wake();
}

std::optional<std::string> Outbox::pop() {
  std::lock_guard lock(mutex_);
  if (!reliable_.empty()) {
    std::string m = std::move(reliable_.front());
    reliable_.pop_front();
    return m;
  }
  std::optional<std::string> s;
  s.swap(snapshot_);
  return s;
}

std::size_t Outbox::pending() const {
  std::lock_guard lock(mutex_);
  return reliable_.size() + (snapshot_ ? 1 : 0);
}

std::size_t Outbox::dropped_snapshots() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

void Outbox::set_notify(std::function<void()> notify) {
  std::lock_guard lock(mutex_);
  notify_ = std::move(notify);
}

void Outbox::wake() {
  std::function<void()> notify;
  {
    std::lock_guard lock(mutex_);
    notify = notify_;
  }
  if (notify) {
    notify();
  }
}

EngineService::EngineService(ServiceConfig config)
    : config_(std::move(config)), engine_(config_.engine) {
  context_.config = &config_.engine;
  context_.mode = config_.input;
  if (!config_.record_path.empty()) {
    record_.open(config_.record_path);
    if (!record_) {
      throw Error("cannot write " + config_.record_path);
    }
  }
  last_phase_ = engine_.runner().phase();
  engine_.set_observer([this](const engine::TickSummary& s) { observe(s); });
}

EngineService::~EngineService() { stop(); }

void EngineService::attach(std::shared_ptr<Outbox> client) {
  std::lock_guard lock(inbound_mutex_);
  inbound_.emplace_back(Attach{std::move(client)});
}

void EngineService::detach(std::shared_ptr<Outbox> client) {
  std::lock_guard lock(inbound_mutex_);
  inbound_.emplace_back(Detach{std::move(client)});
}

void EngineService::submit(std::shared_ptr<Outbox> from, EngineInput input) {
  std::lock_guard lock(inbound_mutex_);
  inbound_.emplace_back(Submit{std::move(from), std::move(input)});
}

void EngineService::step() {
  std::vector<Item> items;
  {
    std::lock_guard lock(inbound_mutex_);
    items.swap(inbound_);
  }
  for (Item& item : items) {
    if (auto* a = std::get_if<Attach>(&item)) {
      clients_.push_back(std::move(a->client));
    } else if (auto* d = std::get_if<Detach>(&item)) {
      std::erase(clients_, d->client);
    } else {
      auto& s = std::get<Submit>(item);
      try {
        consume(s.from, std::move(s.input));
      } catch (const Error& e) {
        if (s.from) {
          s.from->push(error_message(ErrorCode::Invalid, e.what()));
        }
      }
    }
  }
  const std::int64_t next = engine_.next_tick_us();
  while (!pending_.empty() && pending_.begin()->first <= next) {
    auto node = pending_.extract(pending_.begin());
    try {
      push_record(node.mapped().second);
    } catch (const Error& e) {
      if (node.mapped().first) {
        node.mapped().first->push(error_message(ErrorCode::Invalid, e.what()));
      }
    }
  }
  engine_.run_until(next);
  ticks_.store(engine_.ticks());
}

void EngineService::consume(std::shared_ptr<Outbox> from, EngineInput input) {
  const std::int64_t now = std::max(engine_.now_us(), last_pushed_us_);
  if (const auto* in = std::get_if<Input>(&input)) {
    io::PoseRecord r;
    r.t_us = now;
    r.controller = in->controller;
    r.position = in->position;
    r.orientation = in->orientation;
    r.button = in->button;
    r.jaw = in->jaw;
    push_record(r);
    return;
  }
  if (const auto* tr = std::get_if<Trial>(&input)) {
    push_record(io::CommandRecord{now, tr->command});
    return;
  }
  io::ReplayRecord record;
  if (const auto* pk = std::get_if<Packet>(&input)) {
    record = io::ImuRecord{pk->packet};
  } else {
    record = std::get<Blobs>(input).record;
  }
  const std::int64_t t = io::record_time(record);
  if (t < last_pushed_us_) {
    if (from) {
      from->push(error_message(ErrorCode::Order, "record at t_us " + std::to_string(t) +
                                                     " arrived after t_us " +
                                                     std::to_string(last_pushed_us_)));
    }
    return;
  }
  pending_.emplace(t, std::make_pair(std::move(from), std::move(record)));
}

void EngineService::push_record(const io::ReplayRecord& record) {
  engine_.push(record);
  last_pushed_us_ = std::max(last_pushed_us_, io::record_time(record));
  if (record_.is_open()) {
    record_ << io::format_record(record) << '\n';
  }
}

void EngineService::broadcast(const std::string& message) {
  for (const auto& c : clients_) {
    c->push(message);
  }
}

void EngineService::observe(const engine::TickSummary& s) {
  const auto haptic = [&](int instrument, double amplitude, int ms) {
    for (int i = 0; i < 2; ++i) {
      if (instrument < 0 || instrument == i) {
        broadcast(haptic_message(i, amplitude, ms));
      }
    }
  };
  const auto emit = [&](const task::Event& e) {
    broadcast(event_message(s.t_us, e));
    if (e.kind == task::EventKind::Grasp) {
      haptic(e.instrument, kGraspPulseAmplitude, kGraspPulseMs);
    } else if (e.kind == task::EventKind::Fall) {
      released_by_[e.ring] = e.instrument;
    } else if (e.kind == task::EventKind::Drop) {
      const auto it = released_by_.find(e.ring);
      haptic(it == released_by_.end() ? -1 : it->second, kDropPulseAmplitude, kDropPulseMs);
    }
  };
  for (const task::Event& e : s.teleop_events) {
    emit(e);
  }
  for (const task::Event& e : s.result.events) {
    emit(e);
  }
  if (s.phase != last_phase_) {
    last_phase_ = s.phase;
    broadcast(phase_message(s.t_us, s.phase));
  }
  if (s.result.completed) {
    broadcast(metrics_message(*s.result.completed));
  }

  // 30 Hz: every tick whose time crosses a 1/30 s boundary.
  const std::int64_t step = engine_.config().scene.scene.step_us;
  if (s.t_us * 30 / 1'000'000 != (s.t_us - step) * 30 / 1'000'000 && !clients_.empty()) {
    const std::string snapshot = state_message(engine_);
    for (const auto& c : clients_) {
      c->put_snapshot(snapshot);
    }
  }
}

void EngineService::start() {
  if (thread_.joinable()) {
    return;
  }
  stop_.store(false);
  thread_ = std::thread([this] { run(); });
}

void EngineService::stop() {
  stop_.store(true);
  if (thread_.joinable()) {
    thread_.join();
  }
  if (record_.is_open()) {
    record_.flush();
  }
}

void EngineService::run() {
  auto next = std::chrono::steady_clock::now();
  while (!stop_.load()) {
    next += config_.tick_period;
    std::this_thread::sleep_until(next);
    if (tick_times_.size() < kMaxTickTimes) {
      tick_times_.push_back(std::chrono::steady_clock::now());
    }
    step();
  }
}

}  // namespace dex::service
