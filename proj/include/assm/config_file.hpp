#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace assm {

// Flat `key = value` config files; '#' starts a comment.  Keys mirror the
// config structs with dotted prefixes, e.g.  gen.n_train, model.state_dim,
// train.learning_rate, stream.threshold, eval.horizon.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text,
                                    const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::int64_t get_int64(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint64(const std::string& key,
                           std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Throws listing any key outside the allowed set (typo protection).
  void require_known(const std::set<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

}  // namespace assm
