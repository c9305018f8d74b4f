#pragma once

#include <array>
#include <optional>
#include <vector>

#include "dex/task/events.hpp"

namespace dex::task {

struct Protocol {
  double familiarization_s = 300.0;
  double trial_s = 180.0;
  int trials = 3;
  double break_s = 60.0;

  void validate() const;
};

struct TrialReport {
  int trial = 1;
  double duration_s = 0.0;
  int transfers = 0;
  int drops = 0;
  std::optional<double> avg_transfer_time_s;  // empty without transfers
  std::array<double, 2> path_length_m{0.0, 0.0};
  double total_path_length_m = 0.0;
  bool truncated = false;
  EventLog events;
};

// Counts and mean transfer time come from the events alone.
TrialReport compute_metrics(int trial, double duration_s, const EventLog& events,
                            const std::array<double, 2>& path_length_m, bool truncated);

// 100 (later - first) / first; empty when first is zero.
std::optional<double> improvement_pct(double first, double later);
// 100 (first - later) / first; empty when first is zero.
std::optional<double> reduction_pct(double first, double later);

struct SessionReport {
  Protocol protocol;
  std::vector<TrialReport> trials;
  // Entry k compares trial k + 2 against trial 1.
  std::vector<std::optional<double>> transfer_improvement_pct;
  std::vector<std::optional<double>> drop_reduction_pct;
};

SessionReport make_session_report(const Protocol& protocol, std::vector<TrialReport> trials);

}  // namespace dex::task
