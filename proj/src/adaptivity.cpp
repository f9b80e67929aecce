#include "phd/adaptivity.hpp"

#include <set>

namespace phd {

QueryTemplate* TemplateRegistry::record(const BgpQuery& q, const AdaptivityConfig& cfg) {
  if (q.has_variable_predicate()) {
    ++unbounded_;
    return nullptr;
  }
  auto info = derive_template(q);
  auto [it, fresh] = templates_.try_emplace(info.key);
  auto& t = it->second;
  if (fresh) {
    t.shape = info;
    t.values.resize(info.values.size());
  }
  for (std::size_t v = 0; v < info.values.size(); ++v) ++t.values[v][info.values[v].text];
  ++t.frequency;
  return t.frequency == cfg.freq_threshold + 1 ? &t : nullptr;
}

const QueryTemplate* TemplateRegistry::find(const std::string& key) const {
  auto it = templates_.find(key);
  return it == templates_.end() ? nullptr : &it->second;
}

BgpQuery instantiate_template(const QueryTemplate& t, const AdaptivityConfig& cfg) {
  const auto n = t.values.size();
  std::vector<PatternTerm> chosen(n);
  std::set<std::string> taken;
  std::vector<std::size_t> pending_names;
  for (std::size_t v = 0; v < n; ++v) {
    const auto& counts = t.values[v];
    // std::map iterates lexically, so the first maximum wins ties.
    std::string best_value, best_var;
    std::uint64_t best_value_n = 0, best_var_n = 0;
    for (const auto& [text, c] : counts) {
      if (c > best_value_n) best_value = text, best_value_n = c;
      if (text.starts_with('?') && c > best_var_n) best_var = text, best_var_n = c;
    }
    const bool keep_variable = counts.size() > cfg.proactivity_threshold || best_value.starts_with('?');
    if (!keep_variable) {
      chosen[v] = PatternTerm::constant(best_value);
    } else if (!best_var.empty() && taken.insert(best_var).second) {
      chosen[v] = PatternTerm::var(best_var);
    } else {
      pending_names.push_back(v);
    }
  }
  for (auto v : pending_names) {
    std::string name = "?v" + std::to_string(v);
    while (!taken.insert(name).second) name += "_";
    chosen[v] = PatternTerm::var(name);
  }

  auto term = [&](const PatternTerm& lifted) { return chosen.at(std::stoul(lifted.text.substr(2))); };
  BgpQuery q;
  for (const auto& tp : t.shape.patterns) q.patterns.push_back(TriplePattern{term(tp.s), tp.p, term(tp.o)});
  q.projection = q.variables();
  return q;
}

}  // namespace phd
