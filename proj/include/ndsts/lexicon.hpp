#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ndsts/formula.hpp"

namespace ndsts {

struct LexiconError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Listed in lookup priority order, highest first.
enum class RelationKind {
  Inflection,
  Derivation,
  Synonym,
  Antonym,
  Hypernym,
  Similarity,
  Hyponym
};

const char* relation_name(RelationKind k);
std::optional<RelationKind> relation_from_name(std::string_view name);

struct LexiconConfig {
  bool require_same_case = false;
  double disconnected_probability = 0.1;
};

/// Unary implication linking two predicates: forall x . source(x) -> target(x),
/// with the consequent negated for antonym pairs.
struct Axiom {
  std::string source;
  std::string target;
  RelationKind relation = RelationKind::Synonym;
  bool negated = false;
  double probability = 1.0;
  Sort var_sort = Sort::Entity;

  FormulaPtr formula() const;

  bool operator==(const Axiom& o) const {
    return source == o.source && target == o.target && relation == o.relation &&
           negated == o.negated && probability == o.probability &&
           var_sort == o.var_sort;
  }
};

class Lexicon {
 public:
  void add_relation(const std::string& a, const std::string& b, RelationKind k);
  /// Throws LexiconError when the edge would close a cycle.
  void add_isa(const std::string& child, const std::string& parent);
  void add_synset(const std::string& lemma,
                  const std::vector<std::string>& synonyms);

  /// First relation kind in priority order holding between p and q.
  /// Identical predicates count as an inflection. Synonym, antonym and
  /// similarity edges apply in both directions; hypernym/hyponym are directed
  /// and include multi-edge taxonomy paths.
  std::optional<RelationKind> find_relation(const std::string& p,
                                            const std::string& q) const;

  /// Shortest undirected is-a path length between p and q, if connected.
  std::optional<int> taxonomy_distance(const std::string& p,
                                       const std::string& q) const;

  const std::set<std::string>& synonyms_of(const std::string& lemma) const;

  bool empty() const {
    return edges_.empty() && parents_.empty() && synsets_.empty();
  }
  std::size_t relation_edge_count() const { return edge_count_; }
  std::size_t taxonomy_edge_count() const { return isa_count_; }

 private:
  bool has_edge(const std::string& a, const std::string& b,
                RelationKind k) const;
  bool ancestor_of(const std::string& lower, const std::string& upper) const;

  std::map<std::pair<std::string, std::string>, std::set<RelationKind>> edges_;
  std::map<std::string, std::set<std::string>> parents_;
  std::map<std::string, std::set<std::string>> children_;
  std::map<std::string, std::set<std::string>> synsets_;
  std::size_t edge_count_ = 0;
  std::size_t isa_count_ = 0;
};

/// 1/(1+d) over the taxonomy; 1.0 for identical predicates and for
/// synonym/inflection/derivation pairs without a taxonomy path; otherwise the
/// configured disconnected fallback.
double axiom_probability(const std::string& p, const std::string& q,
                         const Lexicon& lex, const LexiconConfig& cfg = {});

/// Candidate axioms for closing the given unproved sub-goals: unary premise
/// predicate p, unary sub-goal predicate q of the same sort, sharing at least
/// one concrete argument, with some relation between them. Deduplicated and
/// sorted by (source, target).
std::vector<Axiom> generate_axioms(const std::vector<FormulaPtr>& premise_atoms,
                                   const std::vector<FormulaPtr>& unproved_subgoals,
                                   const Lexicon& lex,
                                   const LexiconConfig& cfg = {});

/// KB records, one JSON object per line:
///   {"type":"rel","a":lemma,"b":lemma,"rel":kind}
///   {"type":"isa","child":lemma,"parent":lemma}
///   {"type":"syn","lemma":lemma,"synonyms":[...]}
Lexicon lexicon_from_jsonl(std::istream& in);
Lexicon load_lexicon(const std::string& path);

}  // namespace ndsts
