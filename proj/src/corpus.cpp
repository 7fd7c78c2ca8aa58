#include "ndsts/corpus.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ndsts {

namespace {

SentenceAnnotation annotation_from_json(const nlohmann::json& j) {
  SentenceAnnotation a;
  a.tokens = j.at("tokens").get<std::vector<std::string>>();
  a.lemmas = j.at("lemmas").get<std::vector<std::string>>();
  a.pos_tags = j.at("pos").get<std::vector<std::string>>();
  if (a.lemmas.size() != a.tokens.size() ||
      a.pos_tags.size() != a.tokens.size())
    throw CorpusError("tokens, lemmas and pos must have equal length");
  for (const auto& n : j.value("nouns", std::vector<std::string>{}))
    a.noun_lemmas.insert(n);
  for (const auto& v : j.value("verbs", std::vector<std::string>{}))
    a.verb_lemmas.insert(v);
  a.passive = j.value("passive", false);
  return a;
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

void fill_entry(CorpusEntry& e, const nlohmann::json& rec, const Corpus& c) {
  e.id = rec.at("id").get<std::string>();
  if (!valid_id(e.id))
    throw CorpusError("id must be nonempty [A-Za-z0-9_.-]: '" + e.id + "'");
  e.sentence1 = rec.at("sentence1").get<std::string>();
  e.sentence2 = rec.at("sentence2").get<std::string>();
  e.annotation1 = annotation_from_json(rec.at("annotation1"));
  e.annotation2 = annotation_from_json(rec.at("annotation2"));
  e.formula1_text = rec.at("formula1").get<std::string>();
  e.formula2_text = rec.at("formula2").get<std::string>();
  e.gold_score = rec.at("gold_score").get<double>();
  if (e.gold_score < c.score_lo || e.gold_score > c.score_hi) {
    std::ostringstream os;
    os << "gold_score " << e.gold_score << " outside declared range ["
       << c.score_lo << ", " << c.score_hi << "]";
    throw CorpusError(os.str());
  }
  if (rec.contains("gold_label")) {
    e.gold_label = rec.at("gold_label").get<std::string>();
    if (e.gold_label != "yes" && e.gold_label != "no" &&
        e.gold_label != "unknown")
      throw CorpusError("gold_label must be yes, no or unknown");
  }
  Signature sig;  // shared within the pair so constant sorts agree
  auto parse_side = [&](const char* name, const std::string& text) {
    try {
      return parse_formula(text, sig);
    } catch (const ParseError& pe) {
      throw CorpusError(std::string(name) + " at " + std::to_string(pe.line) +
                        ":" + std::to_string(pe.column) + ": " + pe.what());
    } catch (const FormulaError& fe) {
      throw CorpusError(std::string(name) + ": " + fe.what());
    }
  };
  e.formula1 = parse_side("formula1", e.formula1_text);
  e.formula2 = parse_side("formula2", e.formula2_text);
}

}  // namespace

Corpus corpus_from_jsonl(std::istream& in) {
  Corpus c;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      CorpusEntry bad;
      bad.id = "line-" + std::to_string(line_no);
      bad.line = line_no;
      bad.error = std::string("bad JSON: ") + e.what();
      c.entries.push_back(std::move(bad));
      first_record = false;
      continue;
    }
    if (first_record && rec.contains("corpus_meta")) {
      const auto& range = rec.at("corpus_meta").at("score_range");
      c.score_lo = range.at(0).get<double>();
      c.score_hi = range.at(1).get<double>();
      if (!(c.score_lo < c.score_hi))
        throw CorpusError("corpus_meta.score_range must be increasing");
      first_record = false;
      continue;
    }
    first_record = false;
    CorpusEntry e;
    e.line = line_no;
    try {
      fill_entry(e, rec, c);
    } catch (const nlohmann::json::exception& ex) {
      e.formula1.reset();
      e.formula2.reset();
      if (e.id.empty()) e.id = "line-" + std::to_string(line_no);
      e.error = ex.what();
    } catch (const std::runtime_error& ex) {
      e.formula1.reset();
      e.formula2.reset();
      if (e.id.empty()) e.id = "line-" + std::to_string(line_no);
      e.error = ex.what();
    }
    if (!seen.insert(e.id).second)
      throw CorpusError("line " + std::to_string(line_no) + ": duplicate id '" +
                        e.id + "'");
    c.entries.push_back(std::move(e));
  }
  return c;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file: " + path);
  return corpus_from_jsonl(in);
}

namespace {

nlohmann::json params_to_json(const ForestParams& p) {
  nlohmann::json j;
  j["n_trees"] = p.n_trees;
  j["max_depth"] = p.max_depth;
  j["min_samples_leaf"] = p.min_samples_leaf;
  j["features_per_split"] = p.features_per_split;
  j["bootstrap"] = p.bootstrap;
  return j;
}

ForestParams params_from_json(const nlohmann::json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<int>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  p.features_per_split = j.at("features_per_split").get<int>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  return p;
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["step_budget"] = cfg.step_budget;
  j["require_same_case"] = cfg.require_same_case;
  j["disconnected_probability"] = cfg.disconnected_probability;
  if (cfg.grid.empty()) {
    j["grid"] = "default";
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const ForestParams& p : cfg.grid) arr.push_back(params_to_json(p));
    j["grid"] = arr;
  }
  j["k_folds"] = cfg.k_folds;
  j["seed"] = cfg.seed;
  j["split"] = cfg.split;
  j["oracle_bound"] = cfg.oracle_bound;
  return j.dump();
}

RunConfig config_from_json(const std::string& text) {
  RunConfig cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("bad config JSON: ") + e.what());
  }
  try {
    cfg.step_budget = j.value("step_budget", cfg.step_budget);
    cfg.require_same_case = j.value("require_same_case", cfg.require_same_case);
    cfg.disconnected_probability =
        j.value("disconnected_probability", cfg.disconnected_probability);
    if (j.contains("grid") && j.at("grid").is_array())
      for (const auto& g : j.at("grid")) cfg.grid.push_back(params_from_json(g));
    cfg.k_folds = j.value("k_folds", cfg.k_folds);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.split = j.value("split", cfg.split);
    cfg.oracle_bound = j.value("oracle_bound", cfg.oracle_bound);
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("bad config: ") + e.what());
  }
  if (cfg.step_budget <= 0) throw CorpusError("step_budget must be positive");
  if (cfg.k_folds < 1) throw CorpusError("k_folds must be at least 1");
  if (cfg.oracle_bound < 1) throw CorpusError("oracle_bound must be at least 1");
  split_rows(cfg.split, 0);  // validate the shape early
  return cfg;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return config_from_json(os.str());
}

std::vector<std::size_t> split_rows(const std::string& split, std::size_t n) {
  std::vector<std::size_t> rows;
  auto parse_count = [&](std::size_t prefix_len) {
    std::size_t pos = 0;
    const std::string tail = split.substr(prefix_len);
    unsigned long k = 0;
    try {
      k = std::stoul(tail, &pos);
    } catch (const std::exception&) {
      throw CorpusError("bad split '" + split + "'");
    }
    if (pos != tail.size()) throw CorpusError("bad split '" + split + "'");
    return static_cast<std::size_t>(k);
  };
  if (split == "all") {
    for (std::size_t i = 0; i < n; ++i) rows.push_back(i);
  } else if (split.rfind("first:", 0) == 0) {
    std::size_t k = parse_count(6);
    for (std::size_t i = 0; i < n && i < k; ++i) rows.push_back(i);
  } else if (split.rfind("after:", 0) == 0) {
    std::size_t k = parse_count(6);
    for (std::size_t i = k; i < n; ++i) rows.push_back(i);
  } else {
    throw CorpusError("bad split '" + split + "'");
  }
  return rows;
}

}  // namespace ndsts
