#include <atomic>
#include <csignal>
#include <iostream>
#include <vector>

#include "CLI11.hpp"

#include "dex/cli/commands.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desktop laparoscopic skills trainer: tracking, simulation and session tools"};
  app.require_subcommand(1);

  dex::cli::TrackOptions track;
  auto* track_cmd = app.add_subcommand("track", "Run the tracking front end over a replay");
  track_cmd->add_option("--replay", track.replay, "Replay file")->required()->check(CLI::ExistingFile);
  track_cmd->add_option("--calib", track.calib, "Calibration file (default rig when omitted)")
      ->check(CLI::ExistingFile);
  track_cmd->add_option("--out", track.out, "Output CSV")->required();

  dex::cli::RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run the full engine headless over a replay");
  run_cmd->add_option("--replay", run.replay, "Replay file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--calib", run.calib, "Calibration file")->check(CLI::ExistingFile);
  run_cmd->add_option("--scene", run.scene, "Scene file")->check(CLI::ExistingFile);
  run_cmd->add_option("--report", run.report, "Session report (JSON)")->required();
  run_cmd->add_option("--events", run.events, "Event log");

  dex::cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic replay with ground truth");
  synth_cmd->add_option("--scenario", synth.spec.scenario, "static, circle, two-circles or peg-session")
      ->check(CLI::IsMember({"static", "circle", "two-circles", "peg-session"}));
  synth_cmd->add_option("--seed", synth.spec.seed, "Random seed");
  synth_cmd->add_option("--noise-px", synth.spec.noise.pixel_sigma, "Centroid noise sigma (px)")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--gyro-noise", synth.spec.noise.gyro_sigma, "Gyro noise sigma (rad/s)")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--accel-noise", synth.spec.noise.accel_sigma, "Accel noise sigma (m/s^2)")
      ->check(CLI::NonNegativeNumber);
  std::vector<double> gyro_bias{0.0, 0.0, 0.0};
  synth_cmd->add_option("--gyro-bias", gyro_bias, "Constant gyro bias x y z (rad/s)")->expected(3);
  synth_cmd->add_option("--duration", synth.spec.duration_s, "Length for motion scenarios (s)")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--frame-hz", synth.spec.frame_hz, "Camera rate")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--imu-hz", synth.spec.imu_hz, "IMU rate")->check(CLI::PositiveNumber);
  synth_cmd->add_flag("--render", synth.spec.render_frames, "Write PGM frame pairs instead of blobs");
  synth_cmd->add_option("--calib", synth.calib, "Calibration file")->check(CLI::ExistingFile);
  synth_cmd->add_option("--scene", synth.scene, "Scene file")->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  dex::cli::ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Start the live session service");
  serve_cmd->add_option("--address", serve.address, "Listen address");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 picks one)");
  serve_cmd->add_option("--calib", serve.calib, "Calibration file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--scene", serve.scene, "Scene file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--ui-dir", serve.ui_dir, "Static files for the trainer UI")
      ->check(CLI::ExistingDirectory);
  std::string input = "poses";
  serve_cmd->add_option("--input", input, "poses (virtual controllers) or raw (packets and blobs)")
      ->check(CLI::IsMember({"poses", "raw"}));
  serve_cmd->add_option("--record", serve.record, "Append consumed input to this replay file");

  auto* calib_cmd = app.add_subcommand("calib", "Calibration files");
  calib_cmd->require_subcommand(1);
  std::string calib_out;
  auto* calib_init = calib_cmd->add_subcommand("init", "Write the default calibration");
  calib_init->add_option("--out", calib_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*track_cmd) {
      dex::cli::track(track);
    } else if (*run_cmd) {
      const auto report = dex::cli::run(run);
      for (const auto& t : report.trials) {
        std::cout << "trial " << t.trial << ": " << t.transfers << " transfers, " << t.drops
                  << " drops" << (t.truncated ? " (truncated)" : "") << '\n';
      }
    } else if (*synth_cmd) {
      synth.spec.noise.gyro_bias = {gyro_bias[0], gyro_bias[1], gyro_bias[2]};
      dex::cli::synthesize(synth);
    } else if (*serve_cmd) {
      serve.input = input == "raw" ? dex::service::InputMode::Raw : dex::service::InputMode::Poses;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      dex::cli::serve(serve, g_stop, std::cout);
    } else if (*calib_init) {
      dex::cli::calib_init(calib_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "dextrainer: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
