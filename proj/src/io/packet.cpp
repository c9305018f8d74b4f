#include "dex/io/packet.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace dex::io {

namespace {

class Writer {
 public:
  explicit Writer(PacketBytes& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    auto bits = static_cast<std::uint64_t>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_[pos_++] = static_cast<std::uint8_t>(bits >> (8 * i));
    }
  }
  void put_float(float value) { put(std::bit_cast<std::uint32_t>(value)); }

 private:
  PacketBytes& out_;
  std::size_t pos_ = 0;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    }
    return static_cast<T>(bits);
  }
  float get_float() { return std::bit_cast<float>(get<std::uint32_t>()); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

PacketBytes encode_packet(const ControllerPacket& p) {
  PacketBytes out{};
  Writer w(out);
  w.put(kPacketMagic);
  w.put(p.controller_id);
  w.put(p.seq);
  w.put(p.t_us);
  for (float g : p.gyro) {
    w.put_float(g);
  }
  for (float a : p.accel) {
    w.put_float(a);
  }
  w.put(p.buttons);
  w.put_float(p.jaw);
  return out;
}

ControllerPacket decode_packet(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kPacketSize) {
    throw DecodeError("controller packet must be " + std::to_string(kPacketSize) +
                      " bytes, got " + std::to_string(bytes.size()));
  }
  Reader r(bytes);
  if (r.get<std::uint8_t>() != kPacketMagic) {
    throw DecodeError("controller packet has a bad magic byte");
  }
  ControllerPacket p;
  p.controller_id = r.get<std::uint8_t>();
  p.seq = r.get<std::uint16_t>();
  p.t_us = r.get<std::uint64_t>();
  for (float& g : p.gyro) {
    g = r.get_float();
  }
  for (float& a : p.accel) {
    a = r.get_float();
  }
  p.buttons = r.get<std::uint8_t>();
  p.jaw = r.get_float();
  return p;
}

void validate_packet(const ControllerPacket& p) {
  if (p.controller_id > 1) {
    throw DomainError("unknown controller id " + std::to_string(p.controller_id));
  }
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(p.gyro[i]) || !std::isfinite(p.accel[i])) {
      throw DomainError("controller packet carries a non-finite sample");
    }
  }
  if (!(p.jaw >= 0.0f && p.jaw <= 1.0f)) {
    throw DomainError("jaw command outside [0, 1]");
  }
}

bool same_bits(const ControllerPacket& a, const ControllerPacket& b) {
  return encode_packet(a) == encode_packet(b);
}

}  // namespace dex::io
