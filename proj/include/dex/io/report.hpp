#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <variant>

#include "dex/task/metrics.hpp"

namespace dex::io {

// Canonical JSON: fixed key order, reals as six-decimal fixed point, integers and
// booleans verbatim, an absent mean transfer time as null. Equal reports produce
// identical bytes, and parsing a document then writing it again reproduces it.
std::string format_real(double value);

std::string write_report(const task::TrialReport& report);
std::string write_report(const task::SessionReport& report);

using ReportDocument = std::variant<task::TrialReport, task::SessionReport>;

// Throws ParseError for malformed documents.
ReportDocument parse_report(const std::string& text);

// One event per line: t_us kind ring instrument peg value.
std::string write_event_log(const task::EventLog& events);
// The session log prefixes each line with the trial number.
std::string write_event_log(const task::SessionReport& report);

void save_text(const std::string& path, const std::string& text);

}  // namespace dex::io
