#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace phd {

/// Flat key=value configuration. Later assignments override earlier ones.
class Config {
 public:
  void parse(std::string_view text);
  void load_file(const std::string& path);
  /// One "key=value" override, as given on the command line.
  void set(std::string_view assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.contains(key); }
  std::string get(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  double get_double(const std::string& key, double fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace phd
