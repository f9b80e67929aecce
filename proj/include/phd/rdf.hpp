#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phd {

using TermId = std::uint32_t;

enum class TermKind : std::uint8_t { Iri, Literal };

/// Raised for malformed user input (triple files, query text, update files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an id or name is not known to the structure being asked.
class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triple {
  TermId s = 0;
  TermId p = 0;
  TermId o = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// A triple spelled with lexical forms. This is what crosses the wire and
/// what files contain; ids are only meaningful inside one dictionary.
struct LexTriple {
  std::string s;
  std::string p;
  std::string o;

  friend bool operator==(const LexTriple&, const LexTriple&) = default;
  friend auto operator<=>(const LexTriple&, const LexTriple&) = default;
};

/// Bijective lexical <-> id map. Ids are dense and issued in first-seen order.
class Dictionary {
 public:
  TermId intern(std::string_view lexical);
  TermId intern(std::string_view lexical, TermKind kind);

  /// Returns the id of an already interned lexical, or nullopt-like false.
  bool find(std::string_view lexical, TermId& out) const;

  const std::string& resolve(TermId id) const;
  TermKind kind(TermId id) const;

  std::size_t size() const { return reverse_.size(); }

  Triple intern(const LexTriple& t);
  LexTriple resolve(const Triple& t) const;

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::unordered_map<std::string, TermId, StringHash, std::equal_to<>> forward_;
  std::vector<std::string> reverse_;
  std::vector<TermKind> kinds_;
};

/// Guess the kind of a token: quoted tokens are literals, everything else
/// is an IRI shortname.
TermKind classify_term(std::string_view lexical);

/// Parses the line-oriented triple format: three whitespace separated tokens
/// per line, optional trailing ".", '#' comments and blank lines skipped.
/// Throws InputError naming the first bad line; nothing is returned on error.
std::vector<LexTriple> parse_triples(std::istream& in);
std::vector<LexTriple> parse_triples(std::string_view text);
std::vector<LexTriple> read_triple_file(const std::string& path);

/// Parses a single triple line; returns false for blank/comment lines.
bool parse_triple_line(std::string_view line, LexTriple& out, std::size_t line_no);

std::string serialize_triples(const std::vector<LexTriple>& triples);

std::string read_file(const std::string& path);

}  // namespace phd

template <>
struct std::hash<phd::Triple> {
  std::size_t operator()(const phd::Triple& t) const noexcept {
    std::uint64_t h = t.s;
    h = h * 0x9E3779B97F4A7C15ULL ^ t.p;
    h = h * 0x9E3779B97F4A7C15ULL ^ t.o;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};
