#include "dex/io/keyvalue.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dex/math/error.hpp"

namespace dex::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& token, double& out) {
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string> split(const std::string& value) {
  std::istringstream in(value);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) {
    tokens.push_back(t);
  }
  return tokens;
}

}  // namespace

KeyValues KeyValues::parse(std::istream& in, const std::string& source) {
  KeyValues kv;
  kv.source_ = source;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError(source + ":" + std::to_string(number) + ": empty key or value");
    }
    if (!kv.entries_.emplace(key, Entry{value, number}).second) {
      throw ParseError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

const KeyValues::Entry* KeyValues::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return nullptr;
  }
  used_.insert(key);
  return &it->second;
}

void KeyValues::fail(const Entry& entry, const std::string& key, const std::string& what) const {
  throw ParseError(source_ + ":" + std::to_string(entry.line) + ": '" + key + "' " + what);
}

std::vector<double> KeyValues::numbers(const std::string& key, std::size_t count,
                                       const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (e == nullptr) {
    return fallback;
  }
  const auto tokens = split(e->value);
  if (tokens.size() != count) {
    fail(*e, key, "needs " + std::to_string(count) + " number(s)");
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!parse_double(tokens[i], out[i])) {
      fail(*e, key, "has a malformed number '" + tokens[i] + "'");
    }
  }
  return out;
}

double KeyValues::number(const std::string& key, double fallback) const {
  return numbers(key, 1, {fallback})[0];
}

std::int64_t KeyValues::integer(const std::string& key, std::int64_t fallback) const {
  const Entry* e = find(key);
  if (e == nullptr) {
    return fallback;
  }
  std::int64_t out = 0;
  const char* end = e->value.data() + e->value.size();
  const auto [ptr, ec] = std::from_chars(e->value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    fail(*e, key, "must be an integer");
  }
  return out;
}

bool KeyValues::boolean(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (e == nullptr) {
    return fallback;
  }
  if (e->value == "true") {
    return true;
  }
  if (e->value == "false") {
    return false;
  }
  fail(*e, key, "must be true or false");
}

Vec3 KeyValues::vec3(const std::string& key, const Vec3& fallback) const {
  const auto v = numbers(key, 3, {fallback.x, fallback.y, fallback.z});
  return {v[0], v[1], v[2]};
}

UnitQuat KeyValues::quat(const std::string& key, const UnitQuat& fallback) const {
  const auto v = numbers(key, 4, {fallback.w(), fallback.x(), fallback.y(), fallback.z()});
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
  if (std::abs(n - 1.0) > 1e-6) {
    fail(*find(key), key, "must be a unit quaternion (w x y z)");
  }
  if (std::abs(n - 1.0) <= 1e-9) {
    return UnitQuat::from_stored(v[0], v[1], v[2], v[3]);
  }
  return UnitQuat::from_components(v[0], v[1], v[2], v[3]);
}

void KeyValues::reject_unknown() const {
  for (const auto& [key, entry] : entries_) {
    if (used_.count(key) == 0) {
      fail(entry, key, "is not a known key");
    }
  }
}

std::string format_number(double value) {
  if (value == 0.0) {
    return "0";
  }
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_vec3(const Vec3& v) {
  return format_number(v.x) + " " + format_number(v.y) + " " + format_number(v.z);
}

std::string format_quat(const UnitQuat& q) {
  return format_number(q.w()) + " " + format_number(q.x()) + " " + format_number(q.y()) + " " +
         format_number(q.z());
}

}  // namespace dex::io
