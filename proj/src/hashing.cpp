#include "phd/hashing.hpp"

#include <algorithm>
#include <sstream>

#include "phd/rdf.hpp"

namespace phd {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t Placement::worker_of(std::string_view term) const {
  if (auto it = exact_.find(term); it != exact_.end()) return it->second;
  for (const auto& [prefix, w] : prefix_) {
    if (term.starts_with(prefix)) return w;
  }
  return static_cast<std::size_t>(fnv1a64(term) % workers_);
}

void Placement::pin(const std::string& pattern, std::size_t worker) {
  if (worker >= workers_) {
    throw InputError("pin '" + pattern + "' targets worker " + std::to_string(worker) + " but N = " +
                     std::to_string(workers_));
  }
  if (pattern.empty()) throw InputError("empty pin pattern");
  if (pattern.back() == '*') {
    std::string prefix = pattern.substr(0, pattern.size() - 1);
    std::erase_if(prefix_, [&](const auto& e) { return e.first == prefix; });
    prefix_.emplace_back(std::move(prefix), worker);
    std::stable_sort(prefix_.begin(), prefix_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  } else {
    exact_[pattern] = worker;
  }
}

void Placement::load_pins(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string pattern;
    if (!(ls >> pattern) || pattern.starts_with('#')) continue;
    long long w = -1;
    std::string extra;
    if (!(ls >> w) || w < 0 || (ls >> extra)) {
      throw InputError("pin file line " + std::to_string(line_no) + ": expected '<term> <worker>'");
    }
    pin(pattern, static_cast<std::size_t>(w));
  }
}

void Placement::load_pin_file(const std::string& path) { load_pins(read_file(path)); }

std::string Placement::pins_text() const {
  std::string out;
  for (const auto& [t, w] : exact_) out += t + " " + std::to_string(w) + "\n";
  for (const auto& [p, w] : prefix_) out += p + "* " + std::to_string(w) + "\n";
  return out;
}

}  // namespace phd
