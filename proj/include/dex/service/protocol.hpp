#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dex/service/messages.hpp"

namespace dex::service {

// Per-connection protocol state, owned by the connection handler.
struct ClientSession {
  bool greeted = false;
  std::string role;
  // Latest accepted input and packet timestamps per controller.
  std::array<std::optional<std::int64_t>, 2> last_input_us;
  std::array<std::optional<std::int64_t>, 2> last_packet_us;
  std::optional<std::int64_t> last_blobs_us;
};

// Validated input on its way to the engine thread.
using EngineInput = std::variant<Input, Trial, Packet, Blobs>;

struct InboundResult {
  std::vector<std::string> replies;  // sent to this client only, in order
  std::optional<EngineInput> forward;
  bool joined = false;  // the handshake completed with this message
  bool close = false;
};

struct ProtocolContext {
  const engine::EngineConfig* config = nullptr;
  InputMode mode = InputMode::Poses;
};

// hello must come first: anything else before it is a protocol error that closes
// the connection. Afterwards a malformed or out-of-order message is answered
// with an error reply and dropped. Input timestamps must strictly increase per
// controller; inputs that do not match the configured input mode are refused.
InboundResult handle_inbound(ClientSession& session, std::string_view text,
                             const ProtocolContext& context);

}  // namespace dex::service
