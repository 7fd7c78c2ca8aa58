#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ndsts/formula.hpp"
#include "ndsts/lexicon.hpp"
#include "ndsts/prover.hpp"

namespace ndsts {

struct FeatureError : FormulaError {
  using FormulaError::FormulaError;
};

// One entry of the published feature schema. Unbounded features (raw counts,
// lengths) get min-max scaled by a fitted Scaler; bounded ones pass through.
struct FeatureSpec {
  std::string name;
  bool bounded = true;
};

const std::vector<FeatureSpec>& feature_schema();
std::string feature_schema_json();
std::uint64_t feature_schema_hash();

struct SentenceAnnotation {
  std::vector<std::string> tokens;
  std::vector<std::string> lemmas;
  std::vector<std::string> pos_tags;
  std::set<std::string> noun_lemmas;
  std::set<std::string> verb_lemmas;
  bool passive = false;
};

// Everything feature extraction needs to know about one sentence pair.
struct PairInput {
  std::string sentence1;
  std::string sentence2;
  SentenceAnnotation annotation1;
  SentenceAnnotation annotation2;
  FormulaPtr formula1;
  FormulaPtr formula2;
};

// Document-frequency statistics fitted on the training corpus; each sentence
// counts as one document.
struct CorpusStats {
  int documents = 0;
  std::map<std::string, int> doc_freq;

  static CorpusStats fit(const std::vector<std::vector<std::string>>& docs);
  double idf(const std::string& token) const;
};

struct Scaler {
  // Aligned with feature_schema(); bounded features keep (0, 1).
  std::vector<std::pair<double, double>> bounds;

  static Scaler fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> apply(const std::vector<double>& raw) const;
};

std::vector<std::pair<std::string, double>> logic_features(
    const BidirectionalResult& r, const FormulaPtr& formula1,
    const FormulaPtr& formula2);

double string_similarity(const std::string& s1, const std::string& s2);

std::vector<std::pair<std::string, double>> overlap_features(
    const SentenceAnnotation& a1, const SentenceAnnotation& a2,
    const Lexicon& lex);

double tfidf_cosine(const std::vector<std::string>& tokens1,
                    const std::vector<std::string>& tokens2,
                    const CorpusStats& stats);

// Raw (unscaled) vector in schema order.
std::vector<double> raw_features(const PairInput& in,
                                 const BidirectionalResult& r,
                                 const Lexicon& lex, const CorpusStats& stats);

// Scaled vector in schema order, clamped to [0,1].
std::vector<double> assemble(const PairInput& in, const BidirectionalResult& r,
                             const Lexicon& lex, const CorpusStats& stats,
                             const Scaler& scaler);

}  // namespace ndsts
