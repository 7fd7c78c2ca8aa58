#include "ndsts/lexicon.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ndsts {

namespace {

constexpr RelationKind kPriority[] = {
    RelationKind::Inflection, RelationKind::Derivation, RelationKind::Synonym,
    RelationKind::Antonym,    RelationKind::Hypernym,   RelationKind::Similarity,
    RelationKind::Hyponym};

bool symmetric(RelationKind k) {
  return k == RelationKind::Synonym || k == RelationKind::Antonym ||
         k == RelationKind::Similarity;
}

}  // namespace

const char* relation_name(RelationKind k) {
  switch (k) {
    case RelationKind::Inflection: return "inflection";
    case RelationKind::Derivation: return "derivation";
    case RelationKind::Synonym: return "synonym";
    case RelationKind::Antonym: return "antonym";
    case RelationKind::Hypernym: return "hypernym";
    case RelationKind::Similarity: return "similarity";
    case RelationKind::Hyponym: return "hyponym";
  }
  return "?";
}

std::optional<RelationKind> relation_from_name(std::string_view name) {
  for (RelationKind k : kPriority)
    if (name == relation_name(k)) return k;
  return std::nullopt;
}

FormulaPtr Axiom::formula() const {
  Term x = Term::var(var_sort == Sort::Event ? "e1" : "x1", var_sort);
  FormulaPtr consequent = mk_atom(target, {x});
  if (negated) consequent = mk_not(consequent);
  return mk_forall(x, mk_imp(mk_atom(source, {x}), consequent));
}

void Lexicon::add_relation(const std::string& a, const std::string& b,
                           RelationKind k) {
  if (edges_[{a, b}].insert(k).second) ++edge_count_;
}

bool Lexicon::ancestor_of(const std::string& lower,
                          const std::string& upper) const {
  std::deque<std::string> queue{lower};
  std::set<std::string> seen{lower};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    auto it = parents_.find(cur);
    if (it == parents_.end()) continue;
    for (const std::string& p : it->second) {
      if (p == upper) return true;
      if (seen.insert(p).second) queue.push_back(p);
    }
  }
  return false;
}

void Lexicon::add_isa(const std::string& child, const std::string& parent) {
  if (child == parent || ancestor_of(parent, child))
    throw LexiconError("is-a edge " + child + " -> " + parent +
                       " would close a taxonomy cycle");
  if (parents_[child].insert(parent).second) ++isa_count_;
  children_[parent].insert(child);
}

void Lexicon::add_synset(const std::string& lemma,
                         const std::vector<std::string>& synonyms) {
  synsets_[lemma].insert(synonyms.begin(), synonyms.end());
}

bool Lexicon::has_edge(const std::string& a, const std::string& b,
                       RelationKind k) const {
  auto it = edges_.find({a, b});
  return it != edges_.end() && it->second.count(k) > 0;
}

std::optional<RelationKind> Lexicon::find_relation(const std::string& p,
                                                   const std::string& q) const {
  if (p == q) return RelationKind::Inflection;
  for (RelationKind k : kPriority) {
    bool found = has_edge(p, q, k);
    if (!found && symmetric(k)) found = has_edge(q, p, k);
    if (!found && k == RelationKind::Hypernym)
      found = has_edge(q, p, RelationKind::Hyponym) || ancestor_of(p, q);
    if (!found && k == RelationKind::Hyponym)
      found = has_edge(q, p, RelationKind::Hypernym) || ancestor_of(q, p);
    if (found) return k;
  }
  return std::nullopt;
}

std::optional<int> Lexicon::taxonomy_distance(const std::string& p,
                                              const std::string& q) const {
  if (p == q) return 0;
  std::deque<std::pair<std::string, int>> queue{{p, 0}};
  std::set<std::string> seen{p};
  auto expand = [&](const std::map<std::string, std::set<std::string>>& adj,
                    const std::string& cur, int dist) -> std::optional<int> {
    auto it = adj.find(cur);
    if (it == adj.end()) return std::nullopt;
    for (const std::string& next : it->second) {
      if (next == q) return dist + 1;
      if (seen.insert(next).second) queue.emplace_back(next, dist + 1);
    }
    return std::nullopt;
  };
  while (!queue.empty()) {
    auto [cur, dist] = queue.front();
    queue.pop_front();
    if (auto hit = expand(parents_, cur, dist)) return hit;
    if (auto hit = expand(children_, cur, dist)) return hit;
  }
  return std::nullopt;
}

const std::set<std::string>& Lexicon::synonyms_of(
    const std::string& lemma) const {
  static const std::set<std::string> kEmpty;
  auto it = synsets_.find(lemma);
  return it == synsets_.end() ? kEmpty : it->second;
}

double axiom_probability(const std::string& p, const std::string& q,
                         const Lexicon& lex, const LexiconConfig& cfg) {
  if (p == q) return 1.0;
  if (auto d = lex.taxonomy_distance(p, q)) return 1.0 / (1.0 + *d);
  auto kind = lex.find_relation(p, q);
  if (kind == RelationKind::Inflection || kind == RelationKind::Derivation ||
      kind == RelationKind::Synonym)
    return 1.0;
  return cfg.disconnected_probability;
}

namespace {

// Concrete arguments are constants and named variables; an unbound
// metavariable matches nothing.
bool concrete(const Term& t) {
  return t.is_const() || t.is_var();
}

bool shares_argument(const std::vector<Term>& premise_args,
                     const std::vector<Term>& goal_args, bool same_case) {
  for (std::size_t i = 0; i < premise_args.size(); ++i)
    for (std::size_t j = 0; j < goal_args.size(); ++j) {
      if (same_case && i != j) continue;
      if (concrete(premise_args[i]) && premise_args[i] == goal_args[j])
        return true;
    }
  return false;
}

}  // namespace

std::vector<Axiom> generate_axioms(const std::vector<FormulaPtr>& premise_atoms,
                                   const std::vector<FormulaPtr>& unproved_subgoals,
                                   const Lexicon& lex,
                                   const LexiconConfig& cfg) {
  std::vector<Axiom> out;
  for (const FormulaPtr& goal : unproved_subgoals) {
    if (goal->kind != Formula::Kind::Atom || goal->args.size() != 1) continue;
    for (const FormulaPtr& prem : premise_atoms) {
      if (prem->kind != Formula::Kind::Atom || prem->args.size() != 1) continue;
      if (prem->pred == goal->pred) continue;
      if (prem->args[0].sort() != goal->args[0].sort()) continue;
      if (!shares_argument(prem->args, goal->args, cfg.require_same_case))
        continue;
      auto kind = lex.find_relation(prem->pred, goal->pred);
      if (!kind) continue;
      Axiom ax;
      ax.source = prem->pred;
      ax.target = goal->pred;
      ax.relation = *kind;
      ax.negated = *kind == RelationKind::Antonym;
      ax.probability = axiom_probability(prem->pred, goal->pred, lex, cfg);
      ax.var_sort = prem->args[0].sort();
      out.push_back(std::move(ax));
    }
  }
  std::sort(out.begin(), out.end(), [](const Axiom& a, const Axiom& b) {
    return std::tie(a.source, a.target, a.negated) <
           std::tie(b.source, b.target, b.negated);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Lexicon lexicon_from_jsonl(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw LexiconError("KB line " + std::to_string(line_no) + ": " +
                         e.what());
    }
    try {
      std::string type = rec.at("type").get<std::string>();
      if (type == "rel") {
        std::string kind_name = rec.at("rel").get<std::string>();
        auto kind = relation_from_name(kind_name);
        if (!kind)
          throw LexiconError("unknown relation kind '" + kind_name + "'");
        lex.add_relation(rec.at("a").get<std::string>(),
                         rec.at("b").get<std::string>(), *kind);
      } else if (type == "isa") {
        lex.add_isa(rec.at("child").get<std::string>(),
                    rec.at("parent").get<std::string>());
      } else if (type == "syn") {
        lex.add_synset(rec.at("lemma").get<std::string>(),
                       rec.at("synonyms").get<std::vector<std::string>>());
      } else {
        throw LexiconError("unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw LexiconError("KB line " + std::to_string(line_no) + ": " +
                         e.what());
    } catch (const LexiconError& e) {
      throw LexiconError("KB line " + std::to_string(line_no) + ": " +
                         e.what());
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot open KB file " + path);
  return lexicon_from_jsonl(in);
}

}  // namespace ndsts
