#include "dex/task/metrics.hpp"

#include <cmath>

#include "dex/math/error.hpp"

namespace dex::task {

void Protocol::validate() const {
  const auto non_negative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!non_negative(familiarization_s) || !non_negative(break_s) || !(trial_s > 0.0) ||
      !std::isfinite(trial_s) || trials < 1) {
    throw DomainError("protocol needs a positive trial length, at least one trial and "
                      "non-negative familiarization and break lengths");
  }
}

TrialReport compute_metrics(int trial, double duration_s, const EventLog& events,
                            const std::array<double, 2>& path_length_m, bool truncated) {
  TrialReport report;
  report.trial = trial;
  report.duration_s = duration_s;
  report.truncated = truncated;
  report.events = events;
  report.path_length_m = path_length_m;
  report.total_path_length_m = path_length_m[0] + path_length_m[1];
  double transfer_time = 0.0;
  for (const Event& e : events) {
    if (e.kind == EventKind::Transfer) {
      ++report.transfers;
      transfer_time += e.value;
    } else if (e.kind == EventKind::Drop) {
      ++report.drops;
    }
  }
  if (report.transfers > 0) {
    report.avg_transfer_time_s = transfer_time / report.transfers;
  }
  return report;
}

std::optional<double> improvement_pct(double first, double later) {
  if (first == 0.0) {
    return std::nullopt;
  }
  return 100.0 * (later - first) / first;
}

std::optional<double> reduction_pct(double first, double later) {
  if (first == 0.0) {
    return std::nullopt;
  }
  return 100.0 * (first - later) / first;
}

SessionReport make_session_report(const Protocol& protocol, std::vector<TrialReport> trials) {
  SessionReport session;
  session.protocol = protocol;
  session.trials = std::move(trials);
  for (std::size_t k = 1; k < session.trials.size(); ++k) {
    const TrialReport& first = session.trials.front();
    const TrialReport& later = session.trials[k];
    session.transfer_improvement_pct.push_back(improvement_pct(first.transfers, later.transfers));
    session.drop_reduction_pct.push_back(reduction_pct(first.drops, later.drops));
  }
  return session;
}

}  // namespace dex::task
