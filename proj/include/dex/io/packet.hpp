#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "dex/math/error.hpp"

namespace dex::io {

inline constexpr std::uint8_t kPacketMagic = 0xC7;
inline constexpr std::size_t kPacketSize = 41;

// One controller sample as it crosses the emulated wireless link. Fields hold
// exactly what was on the wire; validate_packet() applies the semantic checks.
struct ControllerPacket {
  std::uint8_t controller_id = 0;  // 0 left, 1 right
  std::uint16_t seq = 0;           // wraps
  std::uint64_t t_us = 0;
  std::array<float, 3> gyro{};   // rad/s
  std::array<float, 3> accel{};  // m/s^2
  std::uint8_t buttons = 0;      // bit 0: multifunction button
  float jaw = 0.0f;              // 0 open, 1 closed

  bool button() const { return (buttons & 0x01) != 0; }
};

using PacketBytes = std::array<std::uint8_t, kPacketSize>;

class DecodeError : public Error {
 public:
  using Error::Error;
};

// Little-endian: magic u8, id u8, seq u16, t_us u64, gyro 3xf32, accel 3xf32,
// buttons u8, jaw f32.
PacketBytes encode_packet(const ControllerPacket& packet);

// Throws DecodeError unless the buffer is exactly kPacketSize bytes with the magic byte.
ControllerPacket decode_packet(std::span<const std::uint8_t> bytes);

// Throws DomainError for an unknown controller id, non-finite samples or a jaw
// outside [0, 1].
void validate_packet(const ControllerPacket& packet);

// Field-wise equality with floats compared bit for bit.
bool same_bits(const ControllerPacket& a, const ControllerPacket& b);

}  // namespace dex::io
