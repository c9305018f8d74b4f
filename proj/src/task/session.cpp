#include "dex/task/session.hpp"

#include <algorithm>
#include <cmath>

namespace dex::task {

std::string_view to_string(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::Idle: return "idle";
    case PhaseKind::Familiarization: return "familiarization";
    case PhaseKind::Trial: return "trial";
    case PhaseKind::Break: return "break";
    case PhaseKind::Done: return "done";
  }
  return "unknown";
}

std::string_view to_string(SessionCommand command) {
  switch (command) {
    case SessionCommand::Start: return "start";
    case SessionCommand::Stop: return "stop";
    case SessionCommand::Reset: return "reset";
  }
  return "unknown";
}

std::optional<SessionCommand> session_command_from_string(std::string_view name) {
  for (SessionCommand c : {SessionCommand::Start, SessionCommand::Stop, SessionCommand::Reset}) {
    if (to_string(c) == name) {
      return c;
    }
  }
  return std::nullopt;
}

SessionRunner::SessionRunner(SceneConfig scene, Protocol protocol)
    : scene_(std::move(scene)), protocol_(protocol) {
  protocol_.validate();
}

std::int64_t SessionRunner::phase_length_us(PhaseKind kind) const {
  switch (kind) {
    case PhaseKind::Familiarization: return std::llround(protocol_.familiarization_s * 1e6);
    case PhaseKind::Trial: return std::llround(protocol_.trial_s * 1e6);
    case PhaseKind::Break: return std::llround(protocol_.break_s * 1e6);
    default: return 0;
  }
}

std::int64_t SessionRunner::phase_remaining_us() const {
  return std::max<std::int64_t>(0, phase_length_us(phase_.kind) - elapsed_us_);
}

std::optional<TrialReport> SessionRunner::live_metrics() const {
  if (phase_.kind != PhaseKind::Trial) {
    return std::nullopt;
  }
  const auto& inst = scene_.instruments();
  return compute_metrics(phase_.trial, static_cast<double>(elapsed_us_) * 1e-6, trial_events_,
                         {inst[0].path_length_m, inst[1].path_length_m}, truncated_);
}

void SessionRunner::enter(Phase phase, TickResult& result) {
  if (phase.kind == PhaseKind::Familiarization && phase_length_us(phase.kind) == 0) {
    phase = {PhaseKind::Trial, 1};
  }
  if (phase.kind == PhaseKind::Break && phase_length_us(phase.kind) == 0) {
    phase = {PhaseKind::Trial, phase.trial + 1};
  }
  phase_ = phase;
  elapsed_us_ = 0;
  if (phase.kind == PhaseKind::Familiarization || phase.kind == PhaseKind::Trial) {
    scene_.reset();
    result.scene_reset = true;
  }
  if (phase.kind == PhaseKind::Trial) {
    trial_events_.clear();
    const Event start{0, EventKind::TrialStart, -1, -1, -1, 0.0};
    trial_events_.push_back(start);
    result.events.push_back(start);
  }
}

void SessionRunner::finish_trial(TickResult& result, bool truncated) {
  const Event end{elapsed_us_, EventKind::TrialEnd, -1, -1, -1, 0.0};
  trial_events_.push_back(end);
  result.events.push_back(end);
  const auto& inst = scene_.instruments();
  TrialReport report =
      compute_metrics(phase_.trial, static_cast<double>(elapsed_us_) * 1e-6, trial_events_,
                      {inst[0].path_length_m, inst[1].path_length_m}, truncated);
  reports_.push_back(report);
  result.completed = std::move(report);
  trial_events_.clear();
}

TickResult SessionRunner::command(SessionCommand command) {
  TickResult result;
  switch (command) {
    case SessionCommand::Start:
      if (phase_.kind == PhaseKind::Idle) {
        enter({PhaseKind::Familiarization, 0}, result);
      } else if (phase_.kind == PhaseKind::Familiarization) {
        enter({PhaseKind::Trial, 1}, result);
      } else if (phase_.kind == PhaseKind::Break) {
        enter({PhaseKind::Trial, phase_.trial + 1}, result);
      }
      break;
    case SessionCommand::Stop:
      if (phase_.kind == PhaseKind::Trial) {
        finish_trial(result, true);
      }
      if (phase_.kind != PhaseKind::Idle) {
        phase_ = {PhaseKind::Done, phase_.trial};
        elapsed_us_ = 0;
      }
      break;
    case SessionCommand::Reset:
      scene_.reset();
      phase_ = {};
      elapsed_us_ = 0;
      truncated_ = false;
      trial_events_.clear();
      reports_.clear();
      result.scene_reset = true;
      break;
  }
  return result;
}

TickResult SessionRunner::tick(const std::array<TipTarget, 2>& targets) {
  TickResult result;
  const std::int64_t step = scene_.config().step_us;
  switch (phase_.kind) {
    case PhaseKind::Idle:
    case PhaseKind::Done:
      return result;
    case PhaseKind::Familiarization:
    case PhaseKind::Trial: {
      const std::size_t before = result.events.size();
      scene_.step(targets, result.events);
      result.stepped = true;
      if (phase_.kind == PhaseKind::Trial) {
        trial_events_.insert(trial_events_.end(), result.events.begin() + before,
                             result.events.end());
      }
      break;
    }
    case PhaseKind::Break:
      break;
  }
  elapsed_us_ += step;
  if (elapsed_us_ < phase_length_us(phase_.kind)) {
    return result;
  }
  if (phase_.kind == PhaseKind::Familiarization) {
    enter({PhaseKind::Trial, 1}, result);
  } else if (phase_.kind == PhaseKind::Trial) {
    finish_trial(result, truncated_);
    if (phase_.trial < protocol_.trials) {
      enter({PhaseKind::Break, phase_.trial}, result);
    } else {
      phase_ = {PhaseKind::Done, phase_.trial};
      elapsed_us_ = 0;
    }
  } else if (phase_.kind == PhaseKind::Break) {
    enter({PhaseKind::Trial, phase_.trial + 1}, result);
  }
  return result;
}

void SessionRunner::record(Event event) {
  if (phase_.kind != PhaseKind::Trial) {
    return;
  }
  event.t_us = scene_.t_us();
  trial_events_.push_back(event);
}

}  // namespace dex::task
