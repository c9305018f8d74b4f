#include "dex/engine/engine.hpp"

#include <filesystem>

#include "dex/io/pgm.hpp"
#include "dex/math/error.hpp"

namespace dex::engine {

TrackingFrontEnd::TrackingFrontEnd(io::Calibration calibration, tracking::TrackingConfig config,
                                   double imu_alpha, std::string frame_dir)
    : calibration_(std::move(calibration)),
      pipeline_(calibration_.rig, config),
      imu_alpha_(imu_alpha),
      frame_dir_(std::move(frame_dir)) {}

void TrackingFrontEnd::apply(const io::ImuRecord& record) {
  const io::ControllerPacket& p = record.packet;
  io::validate_packet(p);
  ImuChannel& ch = imu_[p.controller_id];
  const auto t_us = static_cast<std::int64_t>(p.t_us);
  ch.button = p.button();
  ch.jaw = p.jaw;
  if (ch.last_t_us && t_us <= *ch.last_t_us) {
    ++ch.rejected;
    return;
  }
  const imu::ImuSample sample{t_us,
                              {p.gyro[0], p.gyro[1], p.gyro[2]},
                              {p.accel[0], p.accel[1], p.accel[2]}};
  try {
    if (!ch.filter) {
      ch.filter = imu::init_from_accel(sample, imu_alpha_);
    } else {
      ch.filter = imu::filter_step(*ch.filter, sample);
    }
    ch.last_t_us = t_us;
  } catch (const imu::ImuInitError&) {
    ++ch.rejected;
  } catch (const imu::ImuRejectedSample&) {
    ++ch.rejected;
  }
}

const tracking::FrameResult& TrackingFrontEnd::apply(const io::StereoRecord& record) {
  std::vector<tracking::Blob> left;
  std::vector<tracking::Blob> right;
  for (const auto& [l, r] : record.markers) {
    left.push_back({l.u, l.v, 1, 255});
    right.push_back({r.u, r.v, 1, 255});
  }
  last_frame_ = pipeline_.process(record.t_us, left, right);
  return last_frame_;
}

const tracking::FrameResult& TrackingFrontEnd::apply(const io::FrameRecord& record) {
  const auto resolve = [&](const std::string& name) {
    const std::filesystem::path p(name);
    return (p.is_absolute() ? p : std::filesystem::path(frame_dir_) / p).string();
  };
  tracking::IrFrame left = io::load_pgm(resolve(record.left));
  tracking::IrFrame right = io::load_pgm(resolve(record.right));
  left.t_us = record.t_us;
  right.t_us = record.t_us;
  last_frame_ = pipeline_.process(left, right);
  return last_frame_;
}

teleop::PosePair TrackingFrontEnd::poses(std::int64_t t_us) const {
  teleop::PosePair out;
  for (int i = 0; i < 2; ++i) {
    const auto& track = pipeline_.tracks().tracks[i];
    if (!track.active() || !imu_[i].filter) {
      continue;
    }
    out[i] = teleop::fuse_pose(track, imu_[i].filter->q, calibration_.tracker_to_world,
                               calibration_.grip_offset[i], t_us);
  }
  return out;
}

Engine::Engine(EngineConfig config)
    : config_(std::move(config)),
      step_us_(config_.scene.scene.step_us),
      front_end_(config_.calibration, config_.tracking, config_.scene.imu_alpha,
                 config_.frame_dir),
      runner_(config_.scene.scene, config_.scene.protocol) {
  teleop_.translation_scale = config_.scene.translation_scale;
  teleop_.camera_translation_scale = config_.scene.camera_translation_scale;
  teleop_.camera = config_.scene.scene.camera;
  rehome();
  output_.camera = teleop_.camera;
  for (int i = 0; i < 2; ++i) {
    output_.targets[i] = TipTarget{i, teleop_.tips[i], 0.0};
  }
}

void Engine::rehome() {
  const auto home = runner_.scene().home_targets();
  for (int i = 0; i < 2; ++i) {
    teleop_.tips[i] = home[i].pose;
    teleop_.anchors[i].reset();
    teleop_.jaw[i] = 0.0;
  }
}

void Engine::push(const io::ReplayRecord& record) {
  const std::int64_t t = io::record_time(record);
  if (t < last_record_us_) {
    throw Error("engine input went back in time to " + std::to_string(t) + " us");
  }
  last_record_us_ = t;
  while (next_tick_us() < t) {
    tick();
  }
  apply(record);
}

void Engine::run_until(std::int64_t t_us) {
  while (next_tick_us() <= t_us) {
    tick();
  }
}

void Engine::finish() {
  if (ticks_ == 0 && config_.auto_start) {
    tick();
  }
  for (;;) {
    const task::PhaseKind k = runner_.phase().kind;
    if (k == task::PhaseKind::Idle || k == task::PhaseKind::Done) {
      break;
    }
    runner_.mark_truncated();
    tick();
  }
}

void Engine::command(task::SessionCommand cmd, TickSummary* summary) {
  task::TickResult r = runner_.command(cmd);
  if (r.scene_reset) {
    rehome();
  }
  task::TickResult& into = summary != nullptr ? summary->result : pending_;
  into.scene_reset = into.scene_reset || r.scene_reset;
  into.events.insert(into.events.end(), r.events.begin(), r.events.end());
  if (r.completed) {
    into.completed = std::move(r.completed);
  }
}

void Engine::refresh_from_front_end(std::int64_t t_us) {
  const teleop::PosePair poses = front_end_.poses(t_us);
  for (int i = 0; i < 2; ++i) {
    if (raw_source_[i]) {
      input_[i].pose = poses[i];
      input_[i].button = front_end_.imu(i).button;
      input_[i].jaw = front_end_.imu(i).jaw;
    }
  }
}

void Engine::apply(const io::ReplayRecord& record) {
  if (const auto* imu = std::get_if<io::ImuRecord>(&record)) {
    front_end_.apply(*imu);
    raw_source_[imu->packet.controller_id] = true;
    refresh_from_front_end(static_cast<std::int64_t>(imu->packet.t_us));
  } else if (const auto* stereo = std::get_if<io::StereoRecord>(&record)) {
    front_end_.apply(*stereo);
    refresh_from_front_end(stereo->t_us);
  } else if (const auto* frame = std::get_if<io::FrameRecord>(&record)) {
    front_end_.apply(*frame);
    refresh_from_front_end(frame->t_us);
  } else if (const auto* pose = std::get_if<io::PoseRecord>(&record)) {
    const int i = pose->controller;
    raw_source_[i] = false;
    input_[i].pose = teleop::ControllerPose{static_cast<ControllerId>(i), pose->position,
                                            pose->orientation, {}, pose->t_us};
    input_[i].button = pose->button;
    input_[i].jaw = pose->jaw;
  } else {
    command(std::get<io::CommandRecord>(record).command, nullptr);
  }
}

void Engine::tick() {
  TickSummary summary;
  summary.result = std::move(pending_);
  pending_ = {};
  if (ticks_ == 0 && config_.auto_start) {
    command(task::SessionCommand::Start, &summary);
  }
  ++ticks_;
  summary.t_us = now_us();

  teleop::TeleopInput in;
  for (int i = 0; i < 2; ++i) {
    in.poses[i] = input_[i].pose;
    in.jaw[i] = input_[i].jaw;
  }
  in.buttons = {input_[0].button, input_[1].button};
  const teleop::TeleopState before = teleop_;
  output_ = teleop::teleop_step(teleop_, in);

  const auto note = [&](task::EventKind kind, int instrument) {
    task::Event e{runner_.scene().t_us(), kind, -1, instrument, -1, 0.0};
    summary.teleop_events.push_back(e);
    runner_.record(e);
  };
  for (int i = 0; i < 2; ++i) {
    if (before.mode[i] != teleop_.mode[i]) {
      note(teleop_.mode[i] == teleop::ControllerMode::Clutched ? task::EventKind::Clutch
                                                               : task::EventKind::Engage,
           i);
    }
  }
  if (before.global != teleop_.global) {
    note(teleop_.global == teleop::GlobalMode::CameraAdjust ? task::EventKind::CameraEnter
                                                            : task::EventKind::CameraExit,
         -1);
  }

  task::TickResult r = runner_.tick(output_.targets);
  if (r.scene_reset) {
    rehome();
  }
  summary.result.stepped = r.stepped;
  summary.result.scene_reset = summary.result.scene_reset || r.scene_reset;
  summary.result.events.insert(summary.result.events.end(), r.events.begin(), r.events.end());
  if (r.completed) {
    summary.result.completed = std::move(r.completed);
  }
  summary.phase = runner_.phase();
  summary.output = output_;
  if (observer_) {
    observer_(summary);
  }
}

}  // namespace dex::engine
