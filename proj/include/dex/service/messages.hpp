#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "dex/engine/engine.hpp"
#include "dex/io/packet.hpp"
#include "dex/io/replay.hpp"

// Wire messages of the live session endpoint. Every message is one JSON object
// with a "type" tag; the machine-readable schema lives in schema/messages.schema.json.
// Outbound objects are built with a fixed key order, so equal state serializes
// to equal bytes.
namespace dex::service {

enum class InputMode { Poses, Raw };

std::string_view to_string(InputMode mode);

// Why an inbound message was refused. The wire form is the lowercase name.
enum class ErrorCode { Protocol, Malformed, Invalid, Order, Mode };

std::string_view to_string(ErrorCode code);

class MessageError : public Error {
 public:
  MessageError(ErrorCode code, const std::string& what) : Error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Largest accepted |norm(q) - 1| on input orientations.
inline constexpr double kQuatTolerance = 1e-3;

struct Hello {
  std::string role;
};

struct Input {
  std::int64_t t_us = 0;
  int controller = 0;
  Vec3 position;
  UnitQuat orientation;  // renormalized
  bool button = false;
  double jaw = 0.0;
};

struct Trial {
  task::SessionCommand command = task::SessionCommand::Start;
};

// Raw input: one 41-byte controller packet, hex encoded on the wire.
struct Packet {
  io::ControllerPacket packet;
};

// Raw input: matched marker centroids of one stereo frame pair.
struct Blobs {
  io::StereoRecord record;
};

using Inbound = std::variant<Hello, Input, Trial, Packet, Blobs>;

// Throws MessageError(Malformed) for text that is not a JSON object with a known
// type, and MessageError(Invalid) for fields of the wrong type or range.
Inbound parse_inbound(std::string_view text);

std::string welcome_message(const engine::EngineConfig& config, InputMode mode,
                            const std::string& role);
std::string state_message(const engine::Engine& engine);
// t_us is the engine clock; the event keeps its phase-relative time in data.
std::string event_message(std::int64_t t_us, const task::Event& event);
std::string phase_message(std::int64_t t_us, task::Phase phase);
std::string metrics_message(const task::TrialReport& report);
std::string haptic_message(int controller, double amplitude, int duration_ms);
std::string error_message(ErrorCode code, const std::string& text);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace dex::service
