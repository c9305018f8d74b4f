#pragma once

#include <cstdint>
#include <string_view>

namespace dex {

enum class ControllerId : std::uint8_t { Left = 0, Right = 1 };

inline constexpr int index(ControllerId id) { return static_cast<int>(id); }
inline constexpr ControllerId other(ControllerId id) {
  return id == ControllerId::Left ? ControllerId::Right : ControllerId::Left;
}
inline constexpr std::string_view to_string(ControllerId id) {
  return id == ControllerId::Left ? "left" : "right";
}

}  // namespace dex
