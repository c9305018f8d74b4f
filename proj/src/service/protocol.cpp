#include "dex/service/protocol.hpp"

namespace dex::service {

namespace {

bool advance(std::optional<std::int64_t>& last, std::int64_t t_us) {
  if (last && t_us <= *last) {
    return false;
  }
  last = t_us;
  return true;
}

std::string order_text(const char* what, std::int64_t t_us, std::int64_t last) {
  return std::string(what) + " t_us " + std::to_string(t_us) + " does not follow " +
         std::to_string(last);
}

}  // namespace

InboundResult handle_inbound(ClientSession& session, std::string_view text,
                             const ProtocolContext& context) {
  InboundResult out;
  Inbound msg;
  try {
    msg = parse_inbound(text);
  } catch (const MessageError& e) {
    if (!session.greeted) {
      out.replies.push_back(error_message(ErrorCode::Protocol, "expected hello first"));
      out.close = true;
    } else {
      out.replies.push_back(error_message(e.code(), e.what()));
    }
    return out;
  }

  if (!session.greeted) {
    const auto* hello = std::get_if<Hello>(&msg);
    if (hello == nullptr) {
      out.replies.push_back(error_message(ErrorCode::Protocol, "expected hello first"));
      out.close = true;
      return out;
    }
    session.greeted = true;
    session.role = hello->role;
    out.joined = true;
    out.replies.push_back(welcome_message(*context.config, context.mode, hello->role));
    return out;
  }

  if (std::holds_alternative<Hello>(msg)) {
    out.replies.push_back(error_message(ErrorCode::Protocol, "hello already received"));
    return out;
  }
  if (const auto* in = std::get_if<Input>(&msg)) {
    if (context.mode != InputMode::Poses) {
      out.replies.push_back(error_message(ErrorCode::Mode, "server expects raw input"));
      return out;
    }
    auto& last = session.last_input_us[in->controller];
    const std::optional<std::int64_t> before = last;
    if (!advance(last, in->t_us)) {
      out.replies.push_back(error_message(ErrorCode::Order, order_text("input", in->t_us, *before)));
      return out;
    }
    out.forward = *in;
    return out;
  }
  if (const auto* pk = std::get_if<Packet>(&msg)) {
    if (context.mode != InputMode::Raw) {
      out.replies.push_back(error_message(ErrorCode::Mode, "server expects pose input"));
      return out;
    }
    const auto t = static_cast<std::int64_t>(pk->packet.t_us);
    auto& last = session.last_packet_us[pk->packet.controller_id];
    const std::optional<std::int64_t> before = last;
    if (!advance(last, t)) {
      out.replies.push_back(error_message(ErrorCode::Order, order_text("packet", t, *before)));
      return out;
    }
    out.forward = *pk;
    return out;
  }
  if (const auto* bl = std::get_if<Blobs>(&msg)) {
    if (context.mode != InputMode::Raw) {
      out.replies.push_back(error_message(ErrorCode::Mode, "server expects pose input"));
      return out;
    }
    const std::optional<std::int64_t> before = session.last_blobs_us;
    if (!advance(session.last_blobs_us, bl->record.t_us)) {
      out.replies.push_back(
          error_message(ErrorCode::Order, order_text("blobs", bl->record.t_us, *before)));
      return out;
    }
    out.forward = *bl;
    return out;
  }
  out.forward = std::get<Trial>(msg);
  return out;
}

}  // namespace dex::service
