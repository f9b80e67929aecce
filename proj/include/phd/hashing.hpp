#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phd {

/// FNV-1a, 64 bit, over the lexical bytes. This is H in the placement rule
/// j = H(term) mod N.
std::uint64_t fnv1a64(std::string_view bytes);

/// Term -> worker placement: hash by default, with optional pins. A pin is
/// either an exact term or a prefix ending in '*'. Exact pins win; among
/// prefixes the longest match wins.
class Placement {
 public:
  Placement() = default;
  explicit Placement(std::size_t workers) : workers_(workers) {}

  std::size_t workers() const { return workers_; }
  std::size_t worker_of(std::string_view term) const;

  void pin(const std::string& pattern, std::size_t worker);
  bool has_pins() const { return !exact_.empty() || !prefix_.empty(); }

  /// Pin file: one "pattern worker" pair per line, '#' comments allowed.
  void load_pins(std::string_view text);
  void load_pin_file(const std::string& path);
  std::string pins_text() const;

 private:
  std::size_t workers_ = 1;
  std::map<std::string, std::size_t, std::less<>> exact_;
  std::vector<std::pair<std::string, std::size_t>> prefix_;  // longest first
};

}  // namespace phd
