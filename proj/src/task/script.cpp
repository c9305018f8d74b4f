#include "dex/task/script.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dex/math/error.hpp"

namespace dex::task {

namespace {

std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

}  // namespace

Vec3 TaskScript::position_at(int instrument, std::int64_t t_us) const {
  Vec3 p = start[instrument];
  for (const ScriptMove& m : moves[instrument]) {
    if (t_us <= m.t0_us) {
      break;
    }
    if (t_us >= m.t1_us) {
      p = m.to;
      continue;
    }
    const double s = static_cast<double>(t_us - m.t0_us) / static_cast<double>(m.t1_us - m.t0_us);
    return p + s * (m.to - p);
  }
  return p;
}

double TaskScript::jaw_at(int instrument, std::int64_t t_us) const {
  double command = 0.0;
  for (const ScriptJaw& j : jaw[instrument]) {
    if (j.t_us > t_us) {
      break;
    }
    command = j.command;
  }
  return command;
}

std::int64_t TaskScript::end_us() const {
  std::int64_t end = 0;
  for (int i = 0; i < 2; ++i) {
    if (!moves[i].empty()) {
      end = std::max(end, moves[i].back().t1_us);
    }
    if (!jaw[i].empty()) {
      end = std::max(end, jaw[i].back().t_us);
    }
  }
  return end;
}

std::array<TipTarget, 2> TaskScript::targets_at(
    std::int64_t t_us, const std::array<UnitQuat, 2>& orientation) const {
  std::array<TipTarget, 2> targets;
  for (int i = 0; i < 2; ++i) {
    targets[i] = TipTarget{i, {orientation[i], position_at(i, t_us)}, jaw_at(i, t_us)};
  }
  return targets;
}

TaskScript parse_task_script(std::istream& in) {
  TaskScript script;
  std::array<bool, 2> started{false, false};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto fail = [&](const std::string& what) {
      throw ParseError("task script line " + std::to_string(number) + ": " + what);
    };
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string keyword;
    if (!(fields >> keyword)) {
      continue;
    }
    std::string who;
    if (!(fields >> who) || (who != "L" && who != "R")) {
      fail("expected instrument L or R");
    }
    const int i = who == "L" ? 0 : 1;
    if (keyword == "start") {
      Vec3 p;
      if (!(fields >> p.x >> p.y >> p.z)) {
        fail("start needs x y z");
      }
      script.start[i] = p;
      started[i] = true;
    } else if (keyword == "move") {
      double t0 = 0, t1 = 0;
      Vec3 p;
      if (!(fields >> t0 >> t1 >> p.x >> p.y >> p.z)) {
        fail("move needs t0 t1 x y z");
      }
      ScriptMove m{to_us(t0), to_us(t1), p};
      if (m.t1_us <= m.t0_us || !is_finite(p)) {
        fail("move must end after it starts");
      }
      if (!script.moves[i].empty() && m.t0_us < script.moves[i].back().t1_us) {
        fail("moves of one instrument must not overlap");
      }
      script.moves[i].push_back(m);
    } else if (keyword == "jaw") {
      double t = 0, command = 0;
      if (!(fields >> t >> command)) {
        fail("jaw needs t command");
      }
      ScriptJaw j{to_us(t), std::clamp(command, 0.0, 1.0)};
      if (!script.jaw[i].empty() && j.t_us < script.jaw[i].back().t_us) {
        fail("jaw steps must be in time order");
      }
      script.jaw[i].push_back(j);
    } else {
      fail("unknown keyword '" + keyword + "'");
    }
    std::string extra;
    if (fields >> extra) {
      fail("unexpected trailing field '" + extra + "'");
    }
  }
  if (!started[0] || !started[1]) {
    throw ParseError("task script needs a start line for both instruments");
  }
  return script;
}

TaskScript load_task_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open task script " + path);
  }
  return parse_task_script(in);
}

}  // namespace dex::task
