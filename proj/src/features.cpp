#include "ndsts/features.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ndsts/util.hpp"

namespace ndsts {

namespace {

void push_direction_schema(std::vector<FeatureSpec>& out,
                           const std::string& prefix) {
  auto add = [&](const char* name, bool bounded) {
    out.push_back({prefix + name, bounded});
  };
  add("inference_result", true);
  add("axiom_prob_avg", true);
  add("axiom_count", false);
  add("proved_ratio_pool", true);
  add("proved_ratio_before", true);
  add("proved_ratio_after", true);
  add("cases_subj", false);
  add("cases_obj", false);
  add("cases_dat", false);
  add("proof_steps", false);
  add("freq_and_intro", true);
  add("freq_and_elim", true);
  add("freq_imp_intro", true);
  add("freq_imp_elim", true);
  add("freq_exists_intro", true);
  add("freq_exists_elim", true);
  add("freq_eq_elim", true);
}

std::vector<FeatureSpec> build_schema() {
  std::vector<FeatureSpec> out;
  push_direction_schema(out, "fwd_");
  push_direction_schema(out, "bwd_");
  out.push_back({"predicate_overlap", true});
  out.push_back({"semantic_type_overlap", true});
  out.push_back({"has_negation", true});
  out.push_back({"noun_overlap", true});
  out.push_back({"verb_overlap", true});
  out.push_back({"pos_overlap", true});
  out.push_back({"synset_overlap", true});
  out.push_back({"synset_distance", true});
  out.push_back({"length_avg", false});
  out.push_back({"length_diff", false});
  out.push_back({"passive", true});
  out.push_back({"string_similarity", true});
  out.push_back({"tfidf_cosine", true});
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const std::string& s : a) inter += b.count(s);
  return static_cast<double>(inter) /
         static_cast<double>(a.size() + b.size() - inter);
}

double multiset_overlap(const std::map<std::string, int>& a,
                        const std::map<std::string, int>& b) {
  if (a.empty() && b.empty()) return 1.0;
  long min_sum = 0, max_sum = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      max_sum += ia->second;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      max_sum += ib->second;
      ++ib;
    } else {
      min_sum += std::min(ia->second, ib->second);
      max_sum += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return max_sum == 0 ? 1.0
                      : static_cast<double>(min_sum) /
                            static_cast<double>(max_sum);
}

void collect_predicates(const Formula& f,
                        std::map<std::string, std::string>& preds) {
  switch (f.kind) {
    case Formula::Kind::Atom: {
      std::string sig;
      for (const Term& t : f.args) {
        if (!sig.empty()) sig += ",";
        sig += t.sort() == Sort::Event ? "Event" : "Entity";
      }
      preds.emplace(f.pred, sig + "->Prop");
      return;
    }
    case Formula::Kind::Not: collect_predicates(*f.child, preds); return;
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      collect_predicates(*f.left, preds);
      collect_predicates(*f.right, preds);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      collect_predicates(*f.body, preds);
      return;
    default:
      return;
  }
}

bool contains_negation(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Not: return true;
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      return contains_negation(*f.left) || contains_negation(*f.right);
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      return contains_negation(*f.body);
    default:
      return false;
  }
}

double inference_result(const DirectionResult& d) {
  switch (d.status) {
    case ProofStatus::Proved:
    case ProofStatus::ProvedWithAxioms:
      return 1.0;
    case ProofStatus::NegationProved:
      return 0.5;
    default:
      return 0.0;
  }
}

void push_direction_features(
    std::vector<std::pair<std::string, double>>& out, const std::string& prefix,
    const DirectionResult& d) {
  auto add = [&](const char* name, double v) {
    out.emplace_back(prefix + name, v);
  };
  add("inference_result", inference_result(d));

  double prob = 1.0;
  if (!d.axioms_used.empty()) {
    prob = 0.0;
    for (const Axiom& a : d.axioms_used) prob += a.probability;
    prob /= static_cast<double>(d.axioms_used.size());
  }
  add("axiom_prob_avg", prob);
  add("axiom_count", static_cast<double>(d.axioms_used.size()));

  const SubgoalStats& st = d.subgoal_stats;
  double pool_ratio;
  if (d.skipped_subgoals.empty() && d.status != ProofStatus::Failed)
    pool_ratio = 1.0;
  else
    pool_ratio =
        st.premise_pool_size > 0
            ? std::min(1.0, static_cast<double>(st.proved_after_injection) /
                                st.premise_pool_size)
            : 0.0;
  add("proved_ratio_pool", pool_ratio);
  add("proved_ratio_before",
      st.total_subgoals > 0
          ? static_cast<double>(st.proved_before_injection) / st.total_subgoals
          : 1.0);
  add("proved_ratio_after",
      st.total_subgoals > 0
          ? static_cast<double>(st.proved_after_injection) / st.total_subgoals
          : 1.0);

  add("cases_subj", d.case_counts_unproved.subj);
  add("cases_obj", d.case_counts_unproved.obj);
  add("cases_dat", d.case_counts_unproved.dat);
  add("proof_steps", d.trace.proof_steps());

  // Negation rules are counted with the implication rules they abbreviate.
  auto h = d.trace.histogram();
  auto count = [&](Rule r) { return h[static_cast<int>(r)]; };
  double freq[7] = {
      static_cast<double>(count(Rule::AndIntro)),
      static_cast<double>(count(Rule::AndElim)),
      static_cast<double>(count(Rule::ImpIntro) + count(Rule::NegIntro)),
      static_cast<double>(count(Rule::ImpElim) + count(Rule::NegElim)),
      static_cast<double>(count(Rule::ExistsIntro)),
      static_cast<double>(count(Rule::ExistsElim)),
      static_cast<double>(count(Rule::EqElim)),
  };
  double total = 0;
  for (double v : freq) total += v;
  static const char* names[7] = {
      "freq_and_intro",    "freq_and_elim",    "freq_imp_intro",
      "freq_imp_elim",     "freq_exists_intro", "freq_exists_elim",
      "freq_eq_elim"};
  for (int i = 0; i < 7; ++i)
    add(names[i], total > 0 ? freq[i] / total : 0.0);
}

// difflib-style longest matching block over [alo,ahi) x [blo,bhi):
// maximal k, then smallest i, then smallest j.
struct Block {
  int i, j, k;
};

Block longest_match(const std::string& a, int alo, int ahi,
                    const std::string& b, int blo, int bhi,
                    const std::vector<std::vector<int>>& b2j) {
  Block best{alo, blo, 0};
  std::map<int, int> j2len;
  for (int i = alo; i < ahi; ++i) {
    std::map<int, int> newj2len;
    for (int j : b2j[static_cast<unsigned char>(a[i])]) {
      if (j < blo) continue;
      if (j >= bhi) break;
      auto it = j2len.find(j - 1);
      int k = (it == j2len.end() ? 0 : it->second) + 1;
      newj2len[j] = k;
      if (k > best.k) best = {i - k + 1, j - k + 1, k};
    }
    j2len = std::move(newj2len);
  }
  return best;
}

}  // namespace

const std::vector<FeatureSpec>& feature_schema() {
  static const std::vector<FeatureSpec> schema = build_schema();
  return schema;
}

std::string feature_schema_json() {
  std::ostringstream out;
  out << "[";
  bool first = true;
  for (const FeatureSpec& f : feature_schema()) {
    if (!first) out << ",";
    first = false;
    out << "\"" << f.name << "\"";
  }
  out << "]";
  return out.str();
}

std::uint64_t feature_schema_hash() {
  std::string blob;
  for (const FeatureSpec& f : feature_schema())
    blob += f.name + (f.bounded ? "|1;" : "|0;");
  return fnv1a(blob);
}

CorpusStats CorpusStats::fit(
    const std::vector<std::vector<std::string>>& docs) {
  CorpusStats s;
  s.documents = static_cast<int>(docs.size());
  for (const std::vector<std::string>& doc : docs) {
    std::set<std::string> seen(doc.begin(), doc.end());
    for (const std::string& t : seen) ++s.doc_freq[t];
  }
  return s;
}

double CorpusStats::idf(const std::string& token) const {
  if (documents == 0) return 1.0;
  auto it = doc_freq.find(token);
  int df = it == doc_freq.end() ? 1 : std::max(1, it->second);
  return std::log(static_cast<double>(documents) / df) + 1.0;
}

Scaler Scaler::fit(const std::vector<std::vector<double>>& rows) {
  const auto& schema = feature_schema();
  for (const std::vector<double>& r : rows)
    if (r.size() != schema.size())
      throw FeatureError("row width does not match feature schema");
  Scaler s;
  s.bounds.assign(schema.size(), {0.0, 1.0});
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].bounded || rows.empty()) continue;
    double lo = rows[0][i], hi = rows[0][i];
    for (const std::vector<double>& r : rows) {
      lo = std::min(lo, r[i]);
      hi = std::max(hi, r[i]);
    }
    s.bounds[i] = {lo, hi};
  }
  return s;
}

std::vector<double> Scaler::apply(const std::vector<double>& raw) const {
  if (raw.size() != bounds.size())
    throw FeatureError("vector width does not match fitted scaler");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [lo, hi] = bounds[i];
    double v = hi > lo ? (raw[i] - lo) / (hi - lo) : 0.0;
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

std::vector<std::pair<std::string, double>> logic_features(
    const BidirectionalResult& r, const FormulaPtr& formula1,
    const FormulaPtr& formula2) {
  std::vector<std::pair<std::string, double>> out;
  push_direction_features(out, "fwd_", r.forward);
  push_direction_features(out, "bwd_", r.backward);

  std::map<std::string, std::string> p1, p2;
  collect_predicates(*formula1, p1);
  collect_predicates(*formula2, p2);
  std::set<std::string> names1, names2;
  std::map<std::string, int> sigs1, sigs2;
  for (const auto& [name, sig] : p1) {
    names1.insert(name);
    ++sigs1[sig];
  }
  for (const auto& [name, sig] : p2) {
    names2.insert(name);
    ++sigs2[sig];
  }
  out.emplace_back("predicate_overlap", jaccard(names1, names2));
  out.emplace_back("semantic_type_overlap", multiset_overlap(sigs1, sigs2));
  out.emplace_back("has_negation",
                   contains_negation(*formula1) || contains_negation(*formula2)
                       ? 1.0
                       : 0.0);
  return out;
}

double string_similarity(const std::string& s1, const std::string& s2) {
  if (s1.empty() && s2.empty()) return 1.0;
  std::vector<std::vector<int>> b2j(256);
  for (int j = 0; j < static_cast<int>(s2.size()); ++j)
    b2j[static_cast<unsigned char>(s2[j])].push_back(j);

  long matches = 0;
  std::function<void(int, int, int, int)> walk = [&](int alo, int ahi, int blo,
                                                     int bhi) {
    Block m = longest_match(s1, alo, ahi, s2, blo, bhi, b2j);
    if (m.k == 0) return;
    matches += m.k;
    walk(alo, m.i, blo, m.j);
    walk(m.i + m.k, ahi, m.j + m.k, bhi);
  };
  walk(0, static_cast<int>(s1.size()), 0, static_cast<int>(s2.size()));
  return 2.0 * static_cast<double>(matches) /
         static_cast<double>(s1.size() + s2.size());
}

std::vector<std::pair<std::string, double>> overlap_features(
    const SentenceAnnotation& a1, const SentenceAnnotation& a2,
    const Lexicon& lex) {
  std::vector<std::pair<std::string, double>> out;
  out.emplace_back("noun_overlap", jaccard(a1.noun_lemmas, a2.noun_lemmas));
  out.emplace_back("verb_overlap", jaccard(a1.verb_lemmas, a2.verb_lemmas));

  std::map<std::string, int> pos1, pos2;
  for (const std::string& p : a1.pos_tags) ++pos1[p];
  for (const std::string& p : a2.pos_tags) ++pos2[p];
  out.emplace_back("pos_overlap", multiset_overlap(pos1, pos2));

  auto expand = [&](const std::vector<std::string>& lemmas) {
    std::set<std::string> s;
    for (const std::string& l : lemmas) {
      s.insert(l);
      const std::set<std::string>& syn = lex.synonyms_of(l);
      s.insert(syn.begin(), syn.end());
    }
    return s;
  };
  out.emplace_back("synset_overlap",
                   jaccard(expand(a1.lemmas), expand(a2.lemmas)));

  double distance = 0.0;
  if (!a1.lemmas.empty() && !a2.lemmas.empty()) {
    for (const std::string& l1 : a1.lemmas) {
      double best = 0.0;
      for (const std::string& l2 : a2.lemmas)
        best = std::max(best, axiom_probability(l1, l2, lex));
      distance += best;
    }
    distance /= static_cast<double>(a1.lemmas.size());
  }
  out.emplace_back("synset_distance", distance);

  double n1 = static_cast<double>(a1.tokens.size());
  double n2 = static_cast<double>(a2.tokens.size());
  out.emplace_back("length_avg", (n1 + n2) / 2.0);
  out.emplace_back("length_diff", std::abs(n1 - n2));
  out.emplace_back("passive", a1.passive || a2.passive ? 1.0 : 0.0);
  return out;
}

double tfidf_cosine(const std::vector<std::string>& tokens1,
                    const std::vector<std::string>& tokens2,
                    const CorpusStats& stats) {
  std::map<std::string, int> tf1, tf2;
  for (const std::string& t : tokens1) ++tf1[t];
  for (const std::string& t : tokens2) ++tf2[t];
  double dot = 0.0, norm1 = 0.0, norm2 = 0.0;
  for (const auto& [t, c] : tf1) {
    double w = c * stats.idf(t);
    norm1 += w * w;
    auto it = tf2.find(t);
    if (it != tf2.end()) dot += w * it->second * stats.idf(t);
  }
  for (const auto& [t, c] : tf2) {
    double w = c * stats.idf(t);
    norm2 += w * w;
  }
  if (norm1 == 0.0 || norm2 == 0.0) return 0.0;
  return dot / (std::sqrt(norm1) * std::sqrt(norm2));
}

std::vector<double> raw_features(const PairInput& in,
                                 const BidirectionalResult& r,
                                 const Lexicon& lex, const CorpusStats& stats) {
  std::vector<std::pair<std::string, double>> named =
      logic_features(r, in.formula1, in.formula2);
  for (auto& f : overlap_features(in.annotation1, in.annotation2, lex))
    named.push_back(std::move(f));
  named.emplace_back("string_similarity",
                     string_similarity(in.sentence1, in.sentence2));
  named.emplace_back("tfidf_cosine",
                     tfidf_cosine(in.annotation1.tokens, in.annotation2.tokens,
                                  stats));

  const auto& schema = feature_schema();
  if (named.size() != schema.size())
    throw FeatureError("assembled features do not match schema");
  std::vector<double> out(named.size());
  for (std::size_t i = 0; i < named.size(); ++i) {
    if (named[i].first != schema[i].name)
      throw FeatureError("feature order mismatch at " + schema[i].name);
    out[i] = named[i].second;
  }
  return out;
}

std::vector<double> assemble(const PairInput& in, const BidirectionalResult& r,
                             const Lexicon& lex, const CorpusStats& stats,
                             const Scaler& scaler) {
  return scaler.apply(raw_features(in, r, lex, stats));
}

}  // namespace ndsts
