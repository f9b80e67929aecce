#include "phd/sparql.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace phd {

PatternTerm PatternTerm::from_token(std::string_view token) {
  if (!token.empty() && token.front() == '?') return var(std::string(token));
  return constant(std::string(token));
}

std::vector<std::string> TriplePattern::variables() const {
  std::vector<std::string> out;
  for (const auto* t : {&s, &p, &o}) {
    if (t->variable && std::find(out.begin(), out.end(), t->text) == out.end()) out.push_back(t->text);
  }
  return out;
}

std::vector<std::string> BgpQuery::variables() const {
  std::vector<std::string> out;
  for (const auto& tp : patterns) {
    for (auto& v : tp.variables()) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

bool BgpQuery::has_variable_predicate() const {
  return std::any_of(patterns.begin(), patterns.end(), [](const auto& tp) { return tp.p.variable; });
}

bool variables_connected(const std::vector<TriplePattern>& patterns) {
  // Variable-free patterns are boolean filters and take no part.
  std::vector<TriplePattern> bound;
  for (const auto& tp : patterns) {
    if (!tp.variables().empty()) bound.push_back(tp);
  }
  if (bound.size() < patterns.size()) return variables_connected(bound);
  if (patterns.size() <= 1) return true;
  std::vector<std::size_t> parent(patterns.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::unordered_map<std::string, std::size_t> first;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    for (const auto& v : patterns[i].variables()) {
      auto [it, fresh] = first.emplace(v, i);
      if (!fresh) parent[find(i)] = find(it->second);
    }
  }
  const auto root = find(0);
  for (std::size_t i = 1; i < patterns.size(); ++i) {
    if (find(i) != root) return false;
  }
  return true;
}

namespace {

struct Token {
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '{' || c == '}') {
      out.push_back({std::string(1, c), i});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '{' &&
           text[j] != '}') {
      ++j;
    }
    std::string_view word = text.substr(i, j - i);
    // A '.' glued to the end of a term is the pattern separator.
    if (word.size() > 1 && word.back() == '.') {
      out.push_back({std::string(word.substr(0, word.size() - 1)), i});
      out.push_back({".", j - 1});
    } else {
      out.push_back({std::string(word), i});
    }
    i = j;
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
         });
}

}  // namespace

BgpQuery parse_query(std::string_view text) {
  const auto tokens = tokenize(text);
  std::size_t k = 0;
  auto at_end = [&] { return k >= tokens.size(); };
  auto pos = [&] { return at_end() ? text.size() : tokens[k].pos; };
  auto expect = [&](std::string_view word) {
    if (at_end() || !iequals(tokens[k].text, word)) {
      throw SyntaxError("expected '" + std::string(word) + "'", pos());
    }
    ++k;
  };

  BgpQuery q;
  expect("SELECT");
  bool star = false;
  while (!at_end() && !iequals(tokens[k].text, "WHERE")) {
    const auto& t = tokens[k];
    if (t.text == "*") {
      if (star || !q.projection.empty()) throw SyntaxError("'*' cannot be combined with variables", t.pos);
      star = true;
    } else if (t.text.size() > 1 && t.text.front() == '?') {
      if (star) throw SyntaxError("'*' cannot be combined with variables", t.pos);
      if (std::find(q.projection.begin(), q.projection.end(), t.text) == q.projection.end()) {
        q.projection.push_back(t.text);
      }
    } else {
      throw SyntaxError("expected a variable or '*' in the projection, got '" + t.text + "'", t.pos);
    }
    ++k;
  }
  expect("WHERE");
  expect("{");
  while (true) {
    if (at_end()) throw SyntaxError("unterminated group, expected '}'", pos());
    if (tokens[k].text == "}") {
      ++k;
      break;
    }
    std::string_view terms[3];
    for (auto& term : terms) {
      if (at_end() || tokens[k].text == "}" || tokens[k].text == ".") {
        throw SyntaxError("incomplete triple pattern", pos());
      }
      if (tokens[k].text == "?") throw SyntaxError("empty variable name", pos());
      term = tokens[k].text;
      ++k;
    }
    q.patterns.push_back(TriplePattern{PatternTerm::from_token(terms[0]), PatternTerm::from_token(terms[1]),
                                       PatternTerm::from_token(terms[2])});
    if (!at_end() && tokens[k].text == ".") ++k;
  }
  if (!at_end()) throw SyntaxError("unexpected trailing input '" + tokens[k].text + "'", tokens[k].pos);
  if (q.patterns.empty()) throw SyntaxError("empty group pattern", text.size());

  const auto vars = q.variables();
  if (star) q.projection = vars;
  for (const auto& v : q.projection) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) {
      throw UnsupportedQuery("projected variable " + v + " does not occur in any pattern");
    }
  }
  if (!to_query_graph(q).connected() || !variables_connected(q.patterns)) {
    throw UnsupportedQuery("pattern graph is disconnected (cartesian products are not supported)");
  }
  return q;
}

std::vector<BgpQuery> parse_query_file(std::string_view text) {
  std::vector<BgpQuery> out;
  std::string block;
  auto flush = [&] {
    const bool blank = std::all_of(block.begin(), block.end(), [](char c) {
      return std::isspace(static_cast<unsigned char>(c));
    });
    if (!blank) out.push_back(parse_query(block));
    block.clear();
  };
  std::size_t i = 0;
  while (i <= text.size()) {
    const auto nl = text.find('\n', i);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(i, end - i);
    std::string_view trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.remove_suffix(1);
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.remove_prefix(1);
    if (trimmed == "---") {
      flush();
    } else {
      block.append(line);
      block.push_back('\n');
    }
    if (nl == std::string_view::npos) break;
    i = nl + 1;
  }
  flush();
  return out;
}

std::string to_string(const BgpQuery& q) {
  std::string out = "SELECT";
  for (const auto& v : q.projection) out += " " + v;
  out += " WHERE {";
  for (std::size_t i = 0; i < q.patterns.size(); ++i) {
    const auto& tp = q.patterns[i];
    out += (i == 0 ? " " : " . ") + tp.s.text + " " + tp.p.text + " " + tp.o.text;
  }
  out += " }";
  return out;
}

// ---------------------------------------------------------------------------

std::size_t QueryGraph::vertex_index(const PatternTerm& t) const {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i] == t) return i;
  }
  throw LookupError("vertex " + t.text + " is not in the query graph");
}

std::vector<std::size_t> QueryGraph::incident(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].subject == v || edges[e].object == v) out.push_back(e);
  }
  return out;
}

bool QueryGraph::connected() const {
  if (vertices.empty()) return true;
  std::vector<bool> seen(vertices.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto e : incident(v)) {
      for (auto w : {edges[e].subject, edges[e].object}) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

QueryGraph to_query_graph(const BgpQuery& q) {
  QueryGraph g;
  auto add = [&](const PatternTerm& t) {
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
      if (g.vertices[i] == t) return i;
    }
    g.vertices.push_back(t);
    return g.vertices.size() - 1;
  };
  for (std::size_t i = 0; i < q.patterns.size(); ++i) {
    const auto& tp = q.patterns[i];
    const auto s = add(tp.s);
    const auto o = add(tp.o);
    g.edges.push_back(QueryEdge{s, o, tp.p, i});
  }
  g.scores.assign(g.vertices.size(), 0.0);
  return g;
}

// ---------------------------------------------------------------------------
// Canonical forms

namespace {

constexpr std::size_t kMaxOrderings = 40320;

struct Canonical {
  std::string encoding;
  std::vector<std::string> order;  // vertex texts in numbering order
};

// lift: treat subject/object constants as vertices to be renumbered.
Canonical canonicalize(const std::vector<TriplePattern>& patterns, bool lift) {
  auto renamed = [&](const PatternTerm& t, bool vertex_position) {
    return t.variable || (lift && vertex_position);
  };
  auto cls = [&](const PatternTerm& t, bool vertex_position) {
    return renamed(t, vertex_position) ? std::string("?") : "=" + t.text;
  };

  std::vector<std::size_t> idx(patterns.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto key = [&](std::size_t i) {
    const auto& tp = patterns[i];
    return std::make_tuple(cls(tp.p, false), cls(tp.s, true), cls(tp.o, true), tp.s.text == tp.o.text);
  };
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return key(a) < key(b); });

  // Groups of interchangeable patterns; permutations are explored within them.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t total = 1;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i + 1;
    while (j < idx.size() && key(idx[j]) == key(idx[i])) ++j;
    groups.emplace_back(i, j);
    for (std::size_t f = 2; f <= j - i && total <= kMaxOrderings; ++f) total *= f;
    i = j;
  }
  const bool exhaustive = total <= kMaxOrderings;

  auto encode = [&](const std::vector<std::size_t>& order, Canonical& out) {
    std::map<std::string, std::size_t> numbers;
    out.order.clear();
    out.encoding.clear();
    auto code = [&](const PatternTerm& t, bool vertex_position) {
      if (!renamed(t, vertex_position)) return "=" + t.text;
      auto [it, fresh] = numbers.emplace(t.text, numbers.size());
      if (fresh) out.order.push_back(t.text);
      return "?" + std::to_string(it->second);
    };
    for (auto i : order) {
      const auto& tp = patterns[i];
      // Subject before predicate keeps numbering in reading order.
      auto s = code(tp.s, true);
      auto p = code(tp.p, false);
      auto o = code(tp.o, true);
      out.encoding += s + ' ' + p + ' ' + o + '\n';
    }
  };

  Canonical best;
  encode(idx, best);
  if (!exhaustive) return best;

  // Odometer over per-group permutations.
  for (auto& [b, e] : groups) std::sort(idx.begin() + b, idx.begin() + e);
  Canonical cur;
  while (true) {
    encode(idx, cur);
    if (cur.encoding < best.encoding) best = cur;
    std::size_t g = 0;
    for (; g < groups.size(); ++g) {
      auto [b, e] = groups[g];
      if (std::next_permutation(idx.begin() + b, idx.begin() + e)) break;
    }
    if (g == groups.size()) break;
  }
  return best;
}

}  // namespace

std::string canonical_form(const std::vector<TriplePattern>& patterns) {
  return canonicalize(patterns, false).encoding;
}

TemplateInfo derive_template(const BgpQuery& q) {
  if (q.has_variable_predicate()) {
    throw UnsupportedQuery("queries with variable predicates have no template");
  }
  auto c = canonicalize(q.patterns, true);
  TemplateInfo info;
  info.key = c.encoding;
  std::map<std::string, std::size_t> number;
  for (std::size_t i = 0; i < c.order.size(); ++i) {
    number[c.order[i]] = i;
    // Vertex texts are unique across kinds: variables start with '?'.
    info.values.push_back(PatternTerm::from_token(c.order[i]));
  }
  auto lifted = [&](const PatternTerm& t) { return PatternTerm::var("?v" + std::to_string(number.at(t.text))); };
  for (const auto& tp : q.patterns) info.patterns.push_back(TriplePattern{lifted(tp.s), tp.p, lifted(tp.o)});
  return info;
}

}  // namespace phd
