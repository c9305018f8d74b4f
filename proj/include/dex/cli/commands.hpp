#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "dex/service/engine_service.hpp"
#include "dex/synth/synth.hpp"

// The dextrainer subcommands as library calls. Each throws dex::Error with a
// message fit for the terminal.
namespace dex::cli {

struct TrackOptions {
  std::string replay;
  std::string calib;  // empty: default calibration
  std::string out;
};

// CSV with one row per controller per stereo observation. Positions are LED
// positions in the tracker frame; the quaternion is the orientation filter
// estimate and stays empty until the filter has initialised.
void track(const TrackOptions& options);

struct RunOptions {
  std::string replay;
  std::string calib;
  std::string scene;
  std::string report;
  std::string events;  // optional event log
};

// Headless engine over a replay. Without command records in the replay the
// session starts before the first tick.
task::SessionReport run(const RunOptions& options);

struct SynthOptions {
  synth::SynthSpec spec;
  std::string calib;
  std::string scene;
  std::string out;
};

void synthesize(const SynthOptions& options);

struct ServeOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;
  std::string calib;
  std::string scene;
  std::string ui_dir;
  service::InputMode input = service::InputMode::Poses;
  std::string record;
};

// Serves until `stop` becomes true. Prints the listening address to `log`.
void serve(const ServeOptions& options, const std::atomic<bool>& stop, std::ostream& log);

void calib_init(const std::string& out);

}  // namespace dex::cli
