#pragma once

// Flat `key=value` text used for run configs and simulation designs.
// Blank lines and lines starting with '#' or ';' are ignored; keys are
// trimmed and kept in file order.

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace toscca {

class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text);
  static KeyValueFile load(const std::string& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;

  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// One `key=value` per line, keys sorted.
  std::string format() const;

 private:
  std::map<std::string, std::string> entries_;
};

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

}  // namespace toscca
