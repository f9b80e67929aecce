#include "phd/rdf.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace phd {

TermKind classify_term(std::string_view lexical) {
  return !lexical.empty() && lexical.front() == '"' ? TermKind::Literal : TermKind::Iri;
}

TermId Dictionary::intern(std::string_view lexical) {
  return intern(lexical, classify_term(lexical));
}

TermId Dictionary::intern(std::string_view lexical, TermKind kind) {
  if (lexical.empty()) throw InputError("cannot intern an empty term");
  if (auto it = forward_.find(lexical); it != forward_.end()) return it->second;
  const auto id = static_cast<TermId>(reverse_.size());
  forward_.emplace(std::string(lexical), id);
  reverse_.emplace_back(lexical);
  kinds_.push_back(kind);
  return id;
}

bool Dictionary::find(std::string_view lexical, TermId& out) const {
  auto it = forward_.find(lexical);
  if (it == forward_.end()) return false;
  out = it->second;
  return true;
}

const std::string& Dictionary::resolve(TermId id) const {
  if (id >= reverse_.size()) throw LookupError("unknown term id " + std::to_string(id));
  return reverse_[id];
}

TermKind Dictionary::kind(TermId id) const {
  if (id >= kinds_.size()) throw LookupError("unknown term id " + std::to_string(id));
  return kinds_[id];
}

Triple Dictionary::intern(const LexTriple& t) {
  return Triple{intern(t.s), intern(t.p), intern(t.o)};
}

LexTriple Dictionary::resolve(const Triple& t) const {
  return LexTriple{resolve(t.s), resolve(t.p), resolve(t.o)};
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

bool parse_triple_line(std::string_view line, LexTriple& out, std::size_t line_no) {
  auto tokens = split_ws(line);
  if (tokens.empty() || tokens.front().front() == '#') return false;
  if (tokens.size() == 4 && tokens.back() == ".") tokens.pop_back();
  if (tokens.size() != 3) {
    throw InputError("line " + std::to_string(line_no) + ": expected 3 terms, got " +
                     std::to_string(tokens.size()));
  }
  out = LexTriple{std::string(tokens[0]), std::string(tokens[1]), std::string(tokens[2])};
  return true;
}

std::vector<LexTriple> parse_triples(std::istream& in) {
  std::vector<LexTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    LexTriple t;
    if (parse_triple_line(line, t, line_no)) out.push_back(std::move(t));
  }
  return out;
}

std::vector<LexTriple> parse_triples(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_triples(in);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<LexTriple> read_triple_file(const std::string& path) {
  return parse_triples(read_file(path));
}

std::string serialize_triples(const std::vector<LexTriple>& triples) {
  std::string out;
  for (const auto& t : triples) {
    out += t.s;
    out += ' ';
    out += t.p;
    out += ' ';
    out += t.o;
    out += " .\n";
  }
  return out;
}

}  // namespace phd
