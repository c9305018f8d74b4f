#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dex/task/metrics.hpp"
#include "dex/task/scene.hpp"

namespace dex::task {

enum class PhaseKind { Idle, Familiarization, Trial, Break, Done };

std::string_view to_string(PhaseKind kind);

struct Phase {
  PhaseKind kind = PhaseKind::Idle;
  int trial = 0;  // 1-based for Trial and Break (the trial just finished)

  friend bool operator==(const Phase&, const Phase&) = default;
};

enum class SessionCommand { Start, Stop, Reset };

std::string_view to_string(SessionCommand command);
std::optional<SessionCommand> session_command_from_string(std::string_view name);

struct TickResult {
  bool stepped = false;
  bool scene_reset = false;  // a familiarization or trial phase began this tick
  EventLog events;           // events produced this tick, phase-relative times
  std::optional<TrialReport> completed;
};

// Drives the familiarization, trial and break timeline over a PegScene at the
// scene's fixed step. Breaks advance the clock without stepping the scene.
// Each familiarization or trial phase starts from a reset scene.
class SessionRunner {
 public:
  SessionRunner(SceneConfig scene = {}, Protocol protocol = {});

  Phase phase() const { return phase_; }
  std::int64_t phase_elapsed_us() const { return elapsed_us_; }
  const PegScene& scene() const { return scene_; }
  const Protocol& protocol() const { return protocol_; }
  const std::vector<TrialReport>& reports() const { return reports_; }
  // Events of the trial in progress.
  const EventLog& trial_events() const { return trial_events_; }
  // Time left in a timed phase; zero in Idle and Done.
  std::int64_t phase_remaining_us() const;
  // Metrics of the trial in progress so far; empty outside a trial.
  std::optional<TrialReport> live_metrics() const;

  // Start: Idle to familiarization, or skip ahead from familiarization or a break.
  // Stop: ends a running trial early, marked truncated, and finishes the session.
  // Reset: back to Idle with no reports.
  TickResult command(SessionCommand command);

  // Advances one step of the scene clock.
  TickResult tick(const std::array<TipTarget, 2>& targets);

  // Appends an externally produced event to the running trial at the scene clock.
  void record(Event event);

  // Marks the running trial and every later one as fed by exhausted input.
  void mark_truncated() { truncated_ = true; }

  SessionReport report() const { return make_session_report(protocol_, reports_); }

 private:
  void enter(Phase phase, TickResult& result);
  void finish_trial(TickResult& result, bool truncated);
  std::int64_t phase_length_us(PhaseKind kind) const;

  PegScene scene_;
  Protocol protocol_;
  Phase phase_;
  std::int64_t elapsed_us_ = 0;
  bool truncated_ = false;
  bool trial_truncated_ = false;
  EventLog trial_events_;
  std::vector<TrialReport> reports_;
};

}  // namespace dex::task
