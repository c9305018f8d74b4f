#include "dex/cli/commands.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "dex/io/report.hpp"
#include "dex/service/server.hpp"

namespace dex::cli {

namespace {

io::Calibration calibration_or_default(const std::string& path) {
  return path.empty() ? io::Calibration{} : io::load_calibration(path);
}

io::SceneFile scene_or_default(const std::string& path) {
  return path.empty() ? io::SceneFile{} : io::load_scene_file(path);
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string directory_of(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  return parent.empty() ? "." : parent.string();
}

void write_track_rows(std::ostream& out, std::int64_t t_us, const engine::TrackingFrontEnd& fe) {
  for (int i = 0; i < 2; ++i) {
    const tracking::MarkerTrack& track = fe.tracks().tracks[i];
    out << t_us << ',' << to_string(track.id);
    if (track.active()) {
      for (const Vec3& p : {track.position_raw, track.position_smoothed}) {
        out << ',' << num(p.x) << ',' << num(p.y) << ',' << num(p.z);
      }
    } else {
      out << ",,,,,,";
    }
    if (const auto& f = fe.imu(i).filter) {
      out << ',' << num(f->q.w()) << ',' << num(f->q.x()) << ',' << num(f->q.y()) << ','
          << num(f->q.z());
    } else {
      out << ",,,,";
    }
    out << ',' << tracking::to_string(track.status) << '\n';
  }
}

}  // namespace

void track(const TrackOptions& options) {
  const auto records = io::load_replay(options.replay);
  engine::TrackingFrontEnd fe(calibration_or_default(options.calib), {}, io::SceneFile{}.imu_alpha,
                              directory_of(options.replay));
  std::ofstream out(options.out);
  if (!out) {
    throw Error("cannot write " + options.out);
  }
  out << "t_us,controller,raw_x,raw_y,raw_z,smooth_x,smooth_y,smooth_z,qw,qx,qy,qz,status\n";
  for (const auto& r : records) {
    if (const auto* imu = std::get_if<io::ImuRecord>(&r)) {
      fe.apply(*imu);
    } else if (const auto* st = std::get_if<io::StereoRecord>(&r)) {
      fe.apply(*st);
      write_track_rows(out, st->t_us, fe);
    } else if (const auto* fr = std::get_if<io::FrameRecord>(&r)) {
      fe.apply(*fr);
      write_track_rows(out, fr->t_us, fe);
    }
  }
}

task::SessionReport run(const RunOptions& options) {
  const auto records = io::load_replay(options.replay);
  engine::EngineConfig config;
  config.calibration = calibration_or_default(options.calib);
  config.scene = scene_or_default(options.scene);
  config.frame_dir = directory_of(options.replay);
  config.auto_start = std::none_of(records.begin(), records.end(), [](const io::ReplayRecord& r) {
    return std::holds_alternative<io::CommandRecord>(r);
  });
  engine::Engine engine(config);
  for (const auto& r : records) {
    engine.push(r);
  }
  engine.finish();
  const task::SessionReport report = engine.report();
  io::save_text(options.report, io::write_report(report));
  if (!options.events.empty()) {
    io::save_text(options.events, io::write_event_log(report));
  }
  return report;
}

void synthesize(const SynthOptions& options) {
  const io::Calibration calib = calibration_or_default(options.calib);
  const io::SceneFile scene = scene_or_default(options.scene);
  synth::save_output(options.out, synth::synth_session(options.spec, calib, scene));
}

void serve(const ServeOptions& options, const std::atomic<bool>& stop, std::ostream& log) {
  service::ServiceConfig sc;
  sc.engine.calibration = calibration_or_default(options.calib);
  sc.engine.scene = scene_or_default(options.scene);
  sc.input = options.input;
  sc.record_path = options.record;
  service::EngineService engine(sc);

  service::ServerConfig server_config;
  server_config.address = options.address;
  server_config.port = options.port;
  server_config.ui_dir = options.ui_dir;
  service::Server server(engine, server_config);
  engine.start();
  server.start();
  log << "listening on http://" << options.address << ':' << server.port()
      << " (WebSocket /session, " << service::to_string(options.input) << " input)" << std::endl;
  while (!stop.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  server.stop();
  engine.stop();
}

void calib_init(const std::string& out) { io::save_calibration(out, io::Calibration{}); }

}  // namespace dex::cli
