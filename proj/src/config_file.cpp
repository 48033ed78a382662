#include "assm/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "assm/errors.hpp"

namespace assm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end || text.empty()) {
    throw ValidationError("config key '" + key + "': cannot parse '" + text +
                          "'");
  }
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text,
                                           const std::string& origin) {
  KeyValueConfig config;
  config.origin_ = origin;
  std::istringstream stream(text);
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << origin << ":" << line_no << ": expected 'key = value'";
      throw ValidationError(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream msg;
      msg << origin << ":" << line_no << ": empty key";
      throw ValidationError(msg.str());
    }
    config.values_[key] = value;
  }
  return config;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : parse_number<double>(key, it->second);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<int>(key, it->second);
}

std::int64_t KeyValueConfig::get_int64(const std::string& key,
                                       std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : parse_number<std::int64_t>(key, it->second);
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key,
                                         std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : parse_number<std::uint64_t>(key, it->second);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "on") {
    return true;
  }
  if (it->second == "false" || it->second == "0" || it->second == "off") {
    return false;
  }
  throw ValidationError("config key '" + key + "': cannot parse '" +
                        it->second + "' as bool");
}

void KeyValueConfig::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key)) {
      throw ValidationError("unknown config key '" + key + "' in " + origin_);
    }
  }
}

}  // namespace assm
