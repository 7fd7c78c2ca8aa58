#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ndsts/features.hpp"
#include "ndsts/forest.hpp"
#include "ndsts/formula.hpp"

namespace ndsts {

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One sentence pair. Formula texts are kept verbatim; `formula1/2` are null
/// and `error` is set when an entry fails to load (the rest of the corpus
/// still loads).
struct CorpusEntry {
  std::string id;
  std::string sentence1, sentence2;
  SentenceAnnotation annotation1, annotation2;
  std::string formula1_text, formula2_text;
  FormulaPtr formula1, formula2;
  double gold_score = 0.0;
  std::string gold_label;  // "yes" | "no" | "unknown" | "" when absent
  std::string error;       // per-entry load failure, empty when ok
  int line = 0;            // 1-based line in the source file
};

struct Corpus {
  std::vector<CorpusEntry> entries;
  double score_lo = 0.0, score_hi = 5.0;
};

/// JSON lines, one entry per line. An optional leading
/// {"corpus_meta":{"score_range":[lo,hi]}} record declares the score range.
/// Structural problems (bad JSON, missing fields, out-of-range scores,
/// formula parse errors) are recorded on the entry, not thrown; only an
/// unreadable file or duplicate ids throw.
Corpus corpus_from_jsonl(std::istream& in);
Corpus load_corpus(const std::string& path);

/// Everything a run needs beyond its input files; embedded verbatim in every
/// output artifact.
struct RunConfig {
  int step_budget = 10000;
  bool require_same_case = false;
  double disconnected_probability = 0.1;
  std::vector<ForestParams> grid;  // empty = default grid for the schema size
  int k_folds = 3;
  std::uint64_t seed = 1;
  std::string split = "all";  // "all" | "first:N" | "after:N"
  int oracle_bound = 3;

  bool operator==(const RunConfig&) const = default;
};

RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);  // empty path = defaults

/// Row indices selected by a split definition over n rows.
std::vector<std::size_t> split_rows(const std::string& split, std::size_t n);

}  // namespace ndsts
