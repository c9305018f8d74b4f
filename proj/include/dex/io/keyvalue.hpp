#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "dex/math/quat.hpp"
#include "dex/math/vec3.hpp"

namespace dex::io {

// `key = value` lines; `#` starts a comment. Values are whitespace-separated
// numbers, booleans or words. Every key may appear once.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& source);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  Vec3 vec3(const std::string& key, const Vec3& fallback) const;
  UnitQuat quat(const std::string& key, const UnitQuat& fallback) const;  // w x y z
  std::vector<double> numbers(const std::string& key, std::size_t count,
                              const std::vector<double>& fallback) const;

  // Throws ParseError naming the first key that no accessor asked for.
  void reject_unknown() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const Entry& entry, const std::string& key, const std::string& what) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

// Shortest text that parses back to the same double.
std::string format_number(double value);
std::string format_vec3(const Vec3& v);
std::string format_quat(const UnitQuat& q);

}  // namespace dex::io
