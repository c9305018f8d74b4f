#include "dex/synth/peg_user.hpp"

#include <algorithm>
#include <cmath>

namespace dex::synth {

namespace {

constexpr double kGraspOffset = 0.012;  // tip to ring centre along z while holding
constexpr double kLiftHeight = 0.06;
constexpr double kPlaceHeight = 0.02;
constexpr double kCarryHeight = 0.04;

bool on_side(const task::PegScene& scene, const task::Ring& ring, task::Side side) {
  return ring.phase == task::RingPhase::OnPeg && ring.peg >= 0 &&
         scene.pegs()[ring.peg].side == side;
}

bool occupied(const task::PegScene& scene, int peg) {
  return std::any_of(scene.rings().begin(), scene.rings().end(), [&](const task::Ring& r) {
    return r.phase == task::RingPhase::OnPeg && r.peg == peg;
  });
}

}  // namespace

std::vector<Skill> default_learning_curve() {
  return {
      {0.0020, 1.2, 0.08, 3},
      {0.0013, 0.7, 0.10, 5},
      {0.0007, 0.3, 0.12, 10},
  };
}

PegUser::PegUser(std::uint64_t seed, std::vector<Skill> curve)
    : rng_(seed), curve_(std::move(curve)) {
  controller_home_[0] = {-0.15, 1.0, 0.3};
  controller_home_[1] = {0.15, 1.0, 0.3};
}

const Skill& PegUser::skill() const {
  const int i = std::clamp(phase_.trial - 1, 0, static_cast<int>(curve_.size()) - 1);
  return curve_[static_cast<std::size_t>(i)];
}

void PegUser::restart(const task::PegScene& scene) {
  steps_.clear();
  entered_ = false;
  const auto home = scene.home_targets();
  for (int i = 0; i < 2; ++i) {
    tip_[i] = home[i].pose.translation;
    jaw_[i] = 0.0;
  }
  carries_ = 0;
  direction_ = 0;
  ring_ = -1;
}

void PegUser::plan(const task::PegScene& scene) {
  const Skill& s = skill();
  std::exponential_distribution<double> pause(1.0 / std::max(s.hesitation_s, 1e-3));
  const auto wait = [&](double seconds) {
    Step w;
    w.duration_s = seconds;
    steps_.push_back(w);
  };
  const auto move = [&](std::array<std::optional<Vec3>, 2> to, double min_s) {
    double d = 0.0;
    for (int i = 0; i < 2; ++i) {
      if (to[i]) {
        d = std::max(d, norm(*to[i] - tip_[i]));
      }
    }
    Step m;
    m.to = to;
    m.duration_s = std::max(min_s, d / s.speed_mps);
    return m;
  };

  for (int attempt = 0; attempt < 2; ++attempt) {
    const task::Side src = direction_ == 0 ? task::Side::Left : task::Side::Right;
    const task::Ring* pick = nullptr;
    for (const task::Ring& r : scene.rings()) {
      if (on_side(scene, r, src)) {
        pick = &r;
        break;
      }
    }
    if (pick == nullptr) {
      const bool settled =
          std::all_of(scene.rings().begin(), scene.rings().end(), [](const task::Ring& r) {
            return r.phase == task::RingPhase::OnPeg;
          });
      if (settled && attempt == 0) {
        direction_ = 1 - direction_;
        continue;
      }
      wait(0.2);
      return;
    }

    const int p = src == task::Side::Left ? 0 : 1;
    const int q = 1 - p;
    const double p_sign = p == 0 ? -1.0 : 1.0;
    picker_ = p;
    ring_ = pick->id;
    const int half = static_cast<int>(scene.pegs().size()) / 2;
    int dest = pick->peg < half ? pick->peg + half : pick->peg - half;
    if (occupied(scene, dest)) {
      for (const task::Peg& peg : scene.pegs()) {
        if (peg.side != src && !occupied(scene, peg.id)) {
          dest = peg.id;
          break;
        }
      }
    }
    const Vec3 c = pick->pose.translation;
    const Vec3 d = scene.pegs()[dest].base;
    const Vec3 grasp{c.x, c.y, c.z - kGraspOffset};
    const Vec3 above{c.x, kLiftHeight, c.z - kGraspOffset};
    const Vec3 hand_p{0.0, kLiftHeight, -kGraspOffset};
    const Vec3 hand_q{0.0, kLiftHeight, kGraspOffset};
    const Vec3 ready_p{p_sign * 0.03, kLiftHeight, -kGraspOffset};
    const Vec3 ready_q{-p_sign * 0.03, kLiftHeight, kGraspOffset};
    const Vec3 carry{d.x, kCarryHeight, d.z + kGraspOffset};
    const Vec3 place{d.x, kPlaceHeight, d.z + kGraspOffset};

    wait(pause(rng_));
    std::array<std::optional<Vec3>, 2> to;
    to[p] = Vec3{c.x, 0.03, c.z - kGraspOffset};
    to[q] = ready_q;
    Step approach = move(to, 0.4);
    approach.jaw[p] = 0.0;
    approach.jaw[q] = 0.0;
    steps_.push_back(approach);
    to = {};
    to[p] = grasp;
    steps_.push_back(move(to, 0.5));
    Step close;
    close.jaw[p] = 1.0;
    close.duration_s = 0.1;
    close.check = Step::Check::PickerHolds;
    steps_.push_back(close);
    to = {};
    to[p] = above;
    steps_.push_back(move(to, 0.5));
    wait(pause(rng_));
    to = {};
    to[p] = hand_p;
    to[q] = hand_q;
    steps_.push_back(move(to, 0.6));
    Step take;
    take.jaw[q] = 1.0;
    take.duration_s = 0.2;
    steps_.push_back(take);
    Step let_go;
    let_go.jaw[p] = 0.0;
    let_go.duration_s = 0.2;
    let_go.check = Step::Check::ReceiverHolds;
    steps_.push_back(let_go);

    ++carries_;
    const bool slip = s.slip_every > 0 && carries_ % s.slip_every == 0;
    if (slip) {
      to = {};
      // Let go between the pegs, well clear of every capture radius.
      to[q] = hand_q + Vec3{-p_sign * 0.015, -0.01, 0.0};
      steps_.push_back(move(to, 0.4));
      Step drop;
      drop.jaw[q] = 0.0;
      drop.duration_s = 0.3;
      steps_.push_back(drop);
      return;
    }
    to = {};
    to[q] = carry;
    to[p] = ready_p;
    steps_.push_back(move(to, 0.6));
    to = {};
    to[q] = place;
    steps_.push_back(move(to, 0.4));
    Step release;
    release.jaw[q] = 0.0;
    release.duration_s = 0.1;
    steps_.push_back(release);
    to = {};
    to[q] = carry;
    steps_.push_back(move(to, 0.3));
    return;
  }
  wait(0.2);
}

std::vector<io::PoseRecord> PegUser::act(const engine::Engine& engine, std::int64_t t_us) {
  now_us_ = t_us;
  const task::SessionRunner& runner = engine.runner();
  const task::PegScene& scene = runner.scene();
  const task::Phase phase = runner.phase();
  const bool active =
      phase.kind == task::PhaseKind::Familiarization || phase.kind == task::PhaseKind::Trial;
  if (!started_ || phase != phase_) {
    phase_ = phase;
    started_ = true;
    if (active) {
      restart(scene);
      step_start_us_ = t_us;
    }
  }

  if (active) {
    for (int guard = 0; guard < 64; ++guard) {
      if (steps_.empty()) {
        plan(scene);
        entered_ = false;
      }
      Step& step = steps_.front();
      if (!entered_) {
        entered_ = true;
        step_start_us_ = t_us;
        from_ = tip_;
        for (int i = 0; i < 2; ++i) {
          if (step.jaw[i]) {
            jaw_[i] = *step.jaw[i];
          }
        }
      }
      const double elapsed = static_cast<double>(t_us - step_start_us_) * 1e-6;
      if (elapsed < step.duration_s) {
        const double a = elapsed / step.duration_s;
        for (int i = 0; i < 2; ++i) {
          if (step.to[i]) {
            tip_[i] = from_[i] + a * (*step.to[i] - from_[i]);
          }
        }
        break;
      }
      for (int i = 0; i < 2; ++i) {
        if (step.to[i]) {
          tip_[i] = *step.to[i];
        }
      }
      bool ok = true;
      if (step.check != Step::Check::None && ring_ >= 0) {
        const task::Ring& ring = scene.rings()[static_cast<std::size_t>(ring_)];
        const int want = step.check == Step::Check::PickerHolds ? picker_ : 1 - picker_;
        ok = ring.phase == task::RingPhase::Grasped && ring.holder == want;
      }
      steps_.pop_front();
      entered_ = false;
      if (!ok) {
        steps_.clear();
        Step retreat;
        retreat.jaw = {0.0, 0.0};
        for (int i = 0; i < 2; ++i) {
          retreat.to[i] = Vec3{tip_[i].x, kLiftHeight, tip_[i].z};
        }
        retreat.duration_s = 0.5;
        steps_.push_back(retreat);
      }
    }
  }

  // Low-pass random walk with the skill's stationary standard deviation.
  const double sigma = active ? skill().noise_m : 0.0;
  const double a = 0.95;
  std::normal_distribution<double> n01(0.0, 1.0);
  for (Vec3& n : noise_) {
    const double k = std::sqrt(1.0 - a * a) * sigma;
    n = {a * n.x + k * n01(rng_), a * n.y + k * n01(rng_), a * n.z + k * n01(rng_)};
  }

  std::vector<io::PoseRecord> out;
  const teleop::TeleopState& tele = engine.teleop();
  for (int i = 0; i < 2; ++i) {
    io::PoseRecord r;
    r.t_us = t_us;
    r.controller = i;
    r.jaw = jaw_[i];
    if (const auto& anchor = tele.anchors[i]) {
      const Vec3 tip = tip_[i] + noise_[i];
      r.position = anchor->controller.translation +
                   (tip - anchor->tip.translation) / tele.translation_scale;
      r.orientation = anchor->controller.rotation;
    } else {
      r.position = controller_home_[i];
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace dex::synth
