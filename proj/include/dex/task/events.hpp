#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace dex::task {

enum class EventKind {
  TrialStart,
  TrialEnd,
  Grasp,
  HandoverStart,
  Handover,
  Release,
  Fall,
  Place,
  Transfer,
  Drop,
  Respawn,
  IkWarning,
  Clutch,
  Engage,
  CameraEnter,
  CameraExit,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

// Unused integer fields hold -1. `value` carries the transfer time in seconds for
// Transfer events and is 0 otherwise.
struct Event {
  std::int64_t t_us = 0;  // relative to the start of the current phase
  EventKind kind = EventKind::TrialStart;
  int ring = -1;
  int instrument = -1;
  int peg = -1;
  double value = 0.0;

  friend bool operator==(const Event&, const Event&) = default;
};

using EventLog = std::vector<Event>;

}  // namespace dex::task
