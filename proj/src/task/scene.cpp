#include "dex/task/scene.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dex/math/error.hpp"

namespace dex::task {

namespace {

constexpr int kRingCount = 6;

}  // namespace

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::string_view to_string(RingPhase phase) {
  switch (phase) {
    case RingPhase::OnPeg: return "on_peg";
    case RingPhase::Grasped: return "grasped";
    case RingPhase::GraspedBoth: return "grasped_both";
    case RingPhase::Falling: return "falling";
    case RingPhase::Respawning: return "respawning";
  }
  return "unknown";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::TrialStart: return "trial_start";
    case EventKind::TrialEnd: return "trial_end";
    case EventKind::Grasp: return "grasp";
    case EventKind::HandoverStart: return "handover_start";
    case EventKind::Handover: return "handover";
    case EventKind::Release: return "release";
    case EventKind::Fall: return "fall";
    case EventKind::Place: return "place";
    case EventKind::Transfer: return "transfer";
    case EventKind::Drop: return "drop";
    case EventKind::Respawn: return "respawn";
    case EventKind::IkWarning: return "ik_warning";
    case EventKind::Clutch: return "clutch";
    case EventKind::Engage: return "engage";
    case EventKind::CameraEnter: return "camera_enter";
    case EventKind::CameraExit: return "camera_exit";
  }
  return "unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(EventKind::CameraExit); ++k) {
    const auto kind = static_cast<EventKind>(k);
    if (to_string(kind) == name) {
      return kind;
    }
  }
  return std::nullopt;
}

void SceneConfig::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(peg_height_m) || !positive(peg_capture_radius_m) || !positive(ring_radius_m) ||
      !positive(grasp_radius_m) || !positive(gravity_mps2) || !positive(home_insertion_m)) {
    throw DomainError("scene dimensions must be positive");
  }
  if (!(ring_rest_height_m >= 0.0) || !(place_height_margin_m >= 0.0)) {
    throw DomainError("scene heights must be non-negative");
  }
  if (!(jaw_open_threshold < jaw_close_threshold) || jaw_open_threshold < 0.0 ||
      jaw_close_threshold > 1.0) {
    throw DomainError("jaw thresholds must satisfy 0 <= open < close <= 1");
  }
  if (step_us <= 0 || respawn_us < 0) {
    throw DomainError("step and respawn durations must be positive");
  }
  for (const Vec3& rcm : rcm_world) {
    if (!is_finite(rcm)) {
      throw DomainError("instrument pivot must be finite");
    }
  }
}

std::string Peg::name() const {
  return (side == Side::Left ? "L" : "R") + std::to_string(id % 6 + 1);
}

std::vector<Peg> make_pegs(const SceneConfig& config) {
  std::vector<Peg> pegs;
  for (Side side : {Side::Left, Side::Right}) {
    const double sign = side == Side::Left ? -1.0 : 1.0;
    for (double x : config.peg_columns_x_m) {
      for (double z : config.peg_rows_z_m) {
        pegs.push_back({static_cast<int>(pegs.size()), side, {sign * x, 0.0, z}});
      }
    }
  }
  return pegs;
}

double distance_to_ring(const Ring& ring, double ring_radius, const Vec3& point) {
  const Vec3 axis = ring.pose.rotation.rotate({0.0, 1.0, 0.0});
  const Vec3 d = point - ring.pose.translation;
  const double h = dot(d, axis);
  const double rho = norm(d - h * axis);
  return std::hypot(rho - ring_radius, h);
}

bool classify_transfer(const TransferRecord& record, const std::vector<Peg>& pegs,
                       bool require_handover) {
  const auto valid = [&](int peg) { return peg >= 0 && peg < static_cast<int>(pegs.size()); };
  if (!valid(record.source_peg) || !valid(record.dest_peg)) {
    return false;
  }
  if (pegs[record.source_peg].side == pegs[record.dest_peg].side) {
    return false;
  }
  return record.handover_occurred || !require_handover;
}

PegScene::PegScene(SceneConfig config) : config_(std::move(config)) {
  config_.validate();
  pegs_ = make_pegs(config_);
  for (int i = 0; i < 2; ++i) {
    instruments_[i].model = kinematics::InstrumentModel::at_rcm(config_.rcm_world[i]);
  }
  reset();
}

void PegScene::reset() {
  t_us_ = 0;
  rings_.assign(kRingCount, Ring{});
  for (int r = 0; r < kRingCount; ++r) {
    Ring& ring = rings_[r];
    ring.id = r;
    ring.home_peg = r;
    ring.peg = r;
    const Vec3 base = pegs_[r].base;
    ring.pose = RigidTransform::from_translation({base.x, config_.ring_rest_height_m, base.z});
  }
  for (InstrumentState& inst : instruments_) {
    inst.q = inst.model.home();
    inst.q[2] = config_.home_insertion_m;
    inst.tip = kinematics::forward_kinematics(inst.model, inst.q);
    inst.jaw_closed = false;
    inst.ik_ok = true;
    inst.path_length_m = 0.0;
  }
}

std::array<TipTarget, 2> PegScene::home_targets() const {
  std::array<TipTarget, 2> targets;
  for (int i = 0; i < 2; ++i) {
    InstrumentState home = instruments_[i];
    home.q = home.model.home();
    home.q[2] = config_.home_insertion_m;
    targets[i] = TipTarget{i, kinematics::forward_kinematics(home.model, home.q), 0.0};
  }
  return targets;
}

double PegScene::path_length_m() const {
  return instruments_[0].path_length_m + instruments_[1].path_length_m;
}

Event PegScene::event(EventKind kind, int ring, int instrument, int peg) const {
  return Event{t_us_, kind, ring, instrument, peg, 0.0};
}

void PegScene::step(const std::array<TipTarget, 2>& targets, EventLog& events) {
  t_us_ += config_.step_us;
  for (int i = 0; i < 2; ++i) {
    solve(i, targets[i], events);
  }
  update_free(events);
  update_carried();
  for (int i = 0; i < 2; ++i) {
    InstrumentState& inst = instruments_[i];
    const double cmd = std::clamp(targets[i].jaw_command, 0.0, 1.0);
    if (!inst.jaw_closed && cmd >= config_.jaw_close_threshold) {
      inst.jaw_closed = true;
      try_grasp(i, events);
    } else if (inst.jaw_closed && cmd <= config_.jaw_open_threshold) {
      inst.jaw_closed = false;
      release(i, events);
    }
  }
}

void PegScene::solve(int i, const TipTarget& target, EventLog& events) {
  InstrumentState& inst = instruments_[i];
  bool ok = false;
  try {
    const kinematics::IkResult r = kinematics::solve_ik(inst.model, target, inst.q, config_.ik);
    if (r.converged) {
      inst.q = r.q;
      ok = true;
    }
  } catch (const kinematics::ReachabilityError&) {
    ok = false;
  }
  inst.q.jaw = kinematics::jaw_angle(inst.model, target.jaw_command);
  if (!ok && inst.ik_ok) {
    events.push_back(event(EventKind::IkWarning, -1, i));
  }
  inst.ik_ok = ok;
  const RigidTransform tip = kinematics::forward_kinematics(inst.model, inst.q);
  inst.path_length_m += distance(tip.translation, inst.tip.translation);
  inst.tip = tip;
}

void PegScene::update_carried() {
  for (Ring& ring : rings_) {
    if (ring.phase == RingPhase::Grasped || ring.phase == RingPhase::GraspedBoth) {
      ring.pose = instruments_[ring.holder].tip * ring.grip;
    }
  }
}

void PegScene::update_free(EventLog& events) {
  const double dt = static_cast<double>(config_.step_us) * 1e-6;
  for (Ring& ring : rings_) {
    if (ring.phase == RingPhase::Falling) {
      ring.pose.translation = ring.pose.translation + dt * ring.velocity;
      ring.velocity.y -= config_.gravity_mps2 * dt;
      if (ring.pose.translation.y <= 0.0) {
        if (const auto peg = peg_below(ring.pose.translation)) {
          place(ring, *peg, events);
          continue;
        }
        ring.pose.translation.y = 0.0;
        ring.phase = RingPhase::Respawning;
        ring.respawn_left_us = config_.respawn_us;
        ring.carry.reset();
        events.push_back(event(EventKind::Drop, ring.id));
      }
    } else if (ring.phase == RingPhase::Respawning) {
      ring.respawn_left_us -= config_.step_us;
      if (ring.respawn_left_us <= 0) {
        const Vec3 base = pegs_[ring.home_peg].base;
        ring.pose = RigidTransform::from_translation({base.x, config_.ring_rest_height_m, base.z});
        ring.phase = RingPhase::OnPeg;
        ring.peg = ring.home_peg;
        ring.respawn_left_us = 0;
        events.push_back(event(EventKind::Respawn, ring.id, -1, ring.peg));
      }
    }
  }
}

void PegScene::try_grasp(int i, EventLog& events) {
  const Vec3 tip = instruments_[i].tip.translation;
  Ring* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (Ring& ring : rings_) {
    const bool free = ring.phase == RingPhase::OnPeg || ring.phase == RingPhase::Falling;
    const bool other = ring.phase == RingPhase::Grasped && ring.holder != i;
    if (!free && !other) {
      continue;
    }
    const double d = distance_to_ring(ring, config_.ring_radius_m, tip);
    if (d < best_distance) {
      best_distance = d;
      best = &ring;
    }
  }
  if (best == nullptr || best_distance > config_.grasp_radius_m) {
    return;
  }
  Ring& ring = *best;
  if (ring.phase == RingPhase::Grasped) {
    ring.phase = RingPhase::GraspedBoth;
    ring.secondary = i;
    events.push_back(event(EventKind::HandoverStart, ring.id, i));
    return;
  }
  int peg = -1;
  if (ring.phase == RingPhase::OnPeg) {
    peg = ring.peg;
    ring.carry = TransferRecord{ring.id, t_us_, 0, false, peg, -1};
    ring.home_peg = peg;
  }
  ring.phase = RingPhase::Grasped;
  ring.peg = -1;
  ring.holder = i;
  ring.velocity = {};
  ring.grip = instruments_[i].tip.inverse() * ring.pose;
  events.push_back(event(EventKind::Grasp, ring.id, i, peg));
}

void PegScene::release(int i, EventLog& events) {
  for (Ring& ring : rings_) {
    if (ring.phase == RingPhase::GraspedBoth && (ring.holder == i || ring.secondary == i)) {
      if (ring.secondary == i) {
        events.push_back(event(EventKind::Release, ring.id, i));
      } else {
        ring.holder = ring.secondary;
        ring.grip = instruments_[ring.holder].tip.inverse() * ring.pose;
        if (ring.carry) {
          ring.carry->handover_occurred = true;
        }
        events.push_back(event(EventKind::Handover, ring.id, ring.holder));
      }
      ring.secondary = -1;
      ring.phase = RingPhase::Grasped;
    } else if (ring.phase == RingPhase::Grasped && ring.holder == i) {
      const Vec3 c = ring.pose.translation;
      const auto peg = peg_below(c);
      if (peg && c.y > 0.0 && c.y < config_.peg_height_m + config_.place_height_margin_m) {
        place(ring, *peg, events);
      } else {
        ring.phase = RingPhase::Falling;
        ring.holder = -1;
        ring.velocity = {};
        events.push_back(event(EventKind::Fall, ring.id, i));
      }
    }
  }
}

void PegScene::place(Ring& ring, int peg, EventLog& events) {
  const int instrument = ring.holder;
  const Vec3 base = pegs_[peg].base;
  ring.pose = RigidTransform::from_translation({base.x, config_.ring_rest_height_m, base.z});
  ring.phase = RingPhase::OnPeg;
  ring.peg = peg;
  ring.holder = -1;
  ring.secondary = -1;
  ring.velocity = {};
  ring.home_peg = peg;
  events.push_back(event(EventKind::Place, ring.id, instrument, peg));
  if (ring.carry) {
    TransferRecord record = *ring.carry;
    record.t_placed_us = t_us_;
    record.dest_peg = peg;
    if (classify_transfer(record, pegs_, config_.require_handover)) {
      Event e = event(EventKind::Transfer, ring.id, instrument, peg);
      e.value = static_cast<double>(record.t_placed_us - record.t_first_grasp_us) * 1e-6;
      events.push_back(e);
    }
    ring.carry.reset();
  }
}

std::optional<int> PegScene::peg_below(const Vec3& center) const {
  std::optional<int> best;
  double best_distance = config_.peg_capture_radius_m;
  for (const Peg& peg : pegs_) {
    const double d = std::hypot(center.x - peg.base.x, center.z - peg.base.z);
    if (d < best_distance) {
      best_distance = d;
      best = peg.id;
    }
  }
  return best;
}

void PegScene::check_invariants() const {
  const int pegs = static_cast<int>(pegs_.size());
  for (const Ring& ring : rings_) {
    const auto fail = [&](const char* what) {
      throw std::logic_error("ring " + std::to_string(ring.id) + ": " + what);
    };
    const bool held = ring.phase == RingPhase::Grasped || ring.phase == RingPhase::GraspedBoth;
    if ((ring.phase == RingPhase::OnPeg) != (ring.peg >= 0 && ring.peg < pegs)) {
      fail("peg index does not match phase");
    }
    if (held != (ring.holder == 0 || ring.holder == 1)) {
      fail("holder does not match phase");
    }
    if ((ring.phase == RingPhase::GraspedBoth) !=
        ((ring.secondary == 0 || ring.secondary == 1) && ring.secondary != ring.holder)) {
      fail("second holder does not match phase");
    }
    if (held && !instruments_[ring.holder].jaw_closed) {
      fail("held by an open jaw");
    }
    if (ring.phase == RingPhase::OnPeg) {
      const Vec3 axis = ring.pose.rotation.rotate({0.0, 1.0, 0.0});
      const Vec3 base = pegs_[ring.peg].base;
      if (axis.y < 1.0 - 1e-12 ||
          std::hypot(ring.pose.translation.x - base.x, ring.pose.translation.z - base.z) > 1e-12) {
        fail("not aligned with its peg");
      }
    }
    if (ring.home_peg < 0 || ring.home_peg >= pegs) {
      fail("no home peg");
    }
  }
}

}  // namespace dex::task
