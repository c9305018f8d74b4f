#include "dex/io/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dex/math/error.hpp"

namespace dex::io {

namespace {

using nlohmann::json;

std::string optional_real(const std::optional<double>& v) {
  return v ? format_real(*v) : "null";
}

void write_event(std::ostringstream& out, const task::Event& e) {
  out << "{\"t_us\": " << e.t_us << ", \"kind\": \"" << task::to_string(e.kind)
      << "\", \"ring\": " << e.ring << ", \"instrument\": " << e.instrument
      << ", \"peg\": " << e.peg << ", \"value\": " << format_real(e.value) << '}';
}

void write_trial(std::ostringstream& out, const task::TrialReport& r, const std::string& indent) {
  const std::string in = indent + "  ";
  out << "{\n"
      << in << "\"type\": \"trial\",\n"
      << in << "\"trial\": " << r.trial << ",\n"
      << in << "\"duration_s\": " << format_real(r.duration_s) << ",\n"
      << in << "\"transfers\": " << r.transfers << ",\n"
      << in << "\"drops\": " << r.drops << ",\n"
      << in << "\"avg_transfer_time_s\": " << optional_real(r.avg_transfer_time_s) << ",\n"
      << in << "\"path_length_m\": {\"left\": " << format_real(r.path_length_m[0])
      << ", \"right\": " << format_real(r.path_length_m[1]) << "},\n"
      << in << "\"total_path_length_m\": " << format_real(r.total_path_length_m) << ",\n"
      << in << "\"truncated\": " << (r.truncated ? "true" : "false") << ",\n"
      << in << "\"events\": [";
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    out << (i == 0 ? "\n" : ",\n") << in << "  ";
    write_event(out, r.events[i]);
  }
  out << (r.events.empty() ? "]\n" : "\n" + in + "]\n") << indent << '}';
}

void write_optional_list(std::ostringstream& out, const std::vector<std::optional<double>>& v) {
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << (i == 0 ? "" : ", ") << optional_real(v[i]);
  }
  out << ']';
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw ParseError(std::string("report is missing '") + key + "'");
  }
  return j.at(key).get<T>();
}

std::optional<double> optional_field(const json& j) {
  if (j.is_null()) {
    return std::nullopt;
  }
  return j.get<double>();
}

task::TrialReport parse_trial(const json& j) {
  task::TrialReport r;
  r.trial = field<int>(j, "trial");
  r.duration_s = field<double>(j, "duration_s");
  r.transfers = field<int>(j, "transfers");
  r.drops = field<int>(j, "drops");
  r.avg_transfer_time_s = optional_field(field<json>(j, "avg_transfer_time_s"));
  const json paths = field<json>(j, "path_length_m");
  r.path_length_m = {field<double>(paths, "left"), field<double>(paths, "right")};
  r.total_path_length_m = field<double>(j, "total_path_length_m");
  r.truncated = field<bool>(j, "truncated");
  for (const json& e : field<json>(j, "events")) {
    task::Event ev;
    ev.t_us = field<std::int64_t>(e, "t_us");
    const auto name = field<std::string>(e, "kind");
    const auto kind = task::event_kind_from_string(name);
    if (!kind) {
      throw ParseError("unknown event kind '" + name + "'");
    }
    ev.kind = *kind;
    ev.ring = field<int>(e, "ring");
    ev.instrument = field<int>(e, "instrument");
    ev.peg = field<int>(e, "peg");
    ev.value = field<double>(e, "value");
    r.events.push_back(ev);
  }
  return r;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") {
    s.erase(0, 1);
  }
  return s;
}

std::string write_report(const task::TrialReport& report) {
  std::ostringstream out;
  write_trial(out, report, "");
  out << '\n';
  return out.str();
}

std::string write_report(const task::SessionReport& report) {
  const task::Protocol& p = report.protocol;
  std::ostringstream out;
  out << "{\n"
      << "  \"type\": \"session\",\n"
      << "  \"protocol\": {\"familiarization_s\": " << format_real(p.familiarization_s)
      << ", \"trial_s\": " << format_real(p.trial_s) << ", \"trials\": " << p.trials
      << ", \"break_s\": " << format_real(p.break_s) << "},\n"
      << "  \"transfer_improvement_pct\": ";
  write_optional_list(out, report.transfer_improvement_pct);
  out << ",\n  \"drop_reduction_pct\": ";
  write_optional_list(out, report.drop_reduction_pct);
  out << ",\n  \"trials\": [";
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    out << (i == 0 ? "\n    " : ",\n    ");
    write_trial(out, report.trials[i], "    ");
  }
  out << (report.trials.empty() ? "]\n" : "\n  ]\n") << "}\n";
  return out.str();
}

ReportDocument parse_report(const std::string& text) {
  try {
    const json j = json::parse(text);
    const auto type = field<std::string>(j, "type");
    if (type == "trial") {
      return parse_trial(j);
    }
    if (type != "session") {
      throw ParseError("unknown report type '" + type + "'");
    }
    task::SessionReport s;
    const json p = field<json>(j, "protocol");
    s.protocol.familiarization_s = field<double>(p, "familiarization_s");
    s.protocol.trial_s = field<double>(p, "trial_s");
    s.protocol.trials = field<int>(p, "trials");
    s.protocol.break_s = field<double>(p, "break_s");
    for (const json& v : field<json>(j, "transfer_improvement_pct")) {
      s.transfer_improvement_pct.push_back(optional_field(v));
    }
    for (const json& v : field<json>(j, "drop_reduction_pct")) {
      s.drop_reduction_pct.push_back(optional_field(v));
    }
    for (const json& t : field<json>(j, "trials")) {
      s.trials.push_back(parse_trial(t));
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

std::string write_event_log(const task::EventLog& events) {
  std::ostringstream out;
  for (const task::Event& e : events) {
    out << e.t_us << ' ' << task::to_string(e.kind) << ' ' << e.ring << ' ' << e.instrument << ' '
        << e.peg << ' ' << format_real(e.value) << '\n';
  }
  return out.str();
}

std::string write_event_log(const task::SessionReport& report) {
  std::ostringstream out;
  for (const task::TrialReport& t : report.trials) {
    std::istringstream lines(write_event_log(t.events));
    for (std::string line; std::getline(lines, line);) {
      out << t.trial << ' ' << line << '\n';
    }
  }
  return out.str();
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw Error("cannot write " + path);
  }
}

}  // namespace dex::io
