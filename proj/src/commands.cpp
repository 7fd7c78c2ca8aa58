#include "ndsts/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ndsts/features.hpp"
#include "ndsts/lexicon.hpp"
#include "ndsts/oracle.hpp"
#include "ndsts/util.hpp"

namespace ndsts {

std::string status_json_name(ProofStatus s) {
  switch (s) {
    case ProofStatus::Proved: return "proved";
    case ProofStatus::NegationProved: return "negation_proved";
    case ProofStatus::ProvedWithAxioms: return "proved_with_axioms";
    case ProofStatus::ProvedWithSkips: return "proved_with_skips";
    case ProofStatus::Failed: return "failed";
  }
  return "failed";
}

ProofStatus status_from_json_name(const std::string& name) {
  for (ProofStatus s :
       {ProofStatus::Proved, ProofStatus::NegationProved,
        ProofStatus::ProvedWithAxioms, ProofStatus::ProvedWithSkips,
        ProofStatus::Failed})
    if (name == status_json_name(s)) return s;
  throw CommandError("unknown proof status '" + name + "'");
}

namespace {

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::optional<Rule> rule_from_name(const std::string& name) {
  for (int i = 0; i < kRuleCount; ++i) {
    Rule r = static_cast<Rule>(i);
    if (name == rule_name(r)) return r;
  }
  return std::nullopt;
}

Sort sort_from_name(const std::string& name) {
  if (name == sort_name(Sort::Entity)) return Sort::Entity;
  if (name == sort_name(Sort::Event)) return Sort::Event;
  throw CommandError("unknown sort '" + name + "'");
}

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& body) {
  if (jobs < 1) throw CommandError("--jobs must be at least 1");
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

RunConfig resolve_config(const std::string& path,
                         const std::optional<std::uint64_t>& seed) {
  RunConfig cfg = load_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

nlohmann::json config_json(const RunConfig& cfg) {
  return nlohmann::json::parse(config_to_json(cfg));
}

nlohmann::json make_meta(const char* format, const RunConfig& cfg,
                         const std::map<std::string, std::string>& inputs) {
  nlohmann::json meta;
  meta["format"] = format;
  meta["version"] = 1;
  meta["config"] = config_json(cfg);
  nlohmann::json in = nlohmann::json::object();
  for (const auto& [k, v] : inputs) in[k] = v;
  meta["inputs"] = in;
  return meta;
}

void check_meta(const nlohmann::json& meta, const char* format,
                const std::string& path) {
  if (meta.value("format", "") != format)
    throw CommandError(path + ": expected format '" + format + "', found '" +
                       meta.value("format", "<missing>") + "'");
  if (meta.value("version", 0) != 1)
    throw CommandError(path + ": unsupported version");
}

nlohmann::json direction_to_json(const DirectionResult& d) {
  nlohmann::json j;
  j["status"] = status_json_name(d.status);
  nlohmann::json axioms = nlohmann::json::array();
  for (const Axiom& a : d.axioms_used) {
    nlohmann::json aj;
    aj["source"] = a.source;
    aj["target"] = a.target;
    aj["relation"] = relation_name(a.relation);
    aj["negated"] = a.negated;
    aj["probability"] = a.probability;
    aj["sort"] = sort_name(a.var_sort);
    axioms.push_back(aj);
  }
  j["axioms"] = axioms;
  nlohmann::json skipped = nlohmann::json::array();
  for (const FormulaPtr& f : d.skipped_subgoals) skipped.push_back(print_formula(f));
  j["skipped"] = skipped;
  nlohmann::json matched = nlohmann::json::array();
  for (const FormulaPtr& f : d.matched_subgoals) matched.push_back(print_formula(f));
  j["matched"] = matched;
  j["pool"] = d.premise_pool;
  j["stats"] = {{"total_subgoals", d.subgoal_stats.total_subgoals},
                {"proved_before", d.subgoal_stats.proved_before_injection},
                {"proved_after", d.subgoal_stats.proved_after_injection},
                {"pool_size", d.subgoal_stats.premise_pool_size}};
  j["cases"] = {{"subj", d.case_counts_unproved.subj},
                {"obj", d.case_counts_unproved.obj},
                {"dat", d.case_counts_unproved.dat}};
  nlohmann::json trace = nlohmann::json::array();
  for (std::size_t i = 0; i < d.trace.steps.size(); ++i) {
    const RuleApplication& s = d.trace.steps[i];
    trace.push_back({{"step", i},
                     {"rule", rule_name(s.rule)},
                     {"inputs", s.inputs},
                     {"outputs", s.outputs}});
  }
  j["trace"] = trace;
  return j;
}

FormulaPtr parse_free(const std::string& text) {
  Signature sig;
  ParseOptions opts;
  opts.allow_free = true;
  return parse_formula(text, sig, opts);
}

DirectionResult direction_from_json(const nlohmann::json& j) {
  DirectionResult d;
  d.status = status_from_json_name(j.at("status").get<std::string>());
  for (const auto& aj : j.at("axioms")) {
    Axiom a;
    a.source = aj.at("source").get<std::string>();
    a.target = aj.at("target").get<std::string>();
    std::string rel = aj.at("relation").get<std::string>();
    auto kind = relation_from_name(rel);
    if (!kind) throw CommandError("unknown relation '" + rel + "'");
    a.relation = *kind;
    a.negated = aj.at("negated").get<bool>();
    a.probability = aj.at("probability").get<double>();
    a.var_sort = sort_from_name(aj.at("sort").get<std::string>());
    d.axioms_used.push_back(std::move(a));
  }
  for (const auto& s : j.at("skipped"))
    d.skipped_subgoals.push_back(parse_free(s.get<std::string>()));
  for (const auto& s : j.at("matched"))
    d.matched_subgoals.push_back(parse_free(s.get<std::string>()));
  d.premise_pool = j.at("pool").get<std::vector<std::string>>();
  const auto& stats = j.at("stats");
  d.subgoal_stats.total_subgoals = stats.at("total_subgoals").get<int>();
  d.subgoal_stats.proved_before_injection = stats.at("proved_before").get<int>();
  d.subgoal_stats.proved_after_injection = stats.at("proved_after").get<int>();
  d.subgoal_stats.premise_pool_size = stats.at("pool_size").get<int>();
  const auto& cases = j.at("cases");
  d.case_counts_unproved.subj = cases.at("subj").get<int>();
  d.case_counts_unproved.obj = cases.at("obj").get<int>();
  d.case_counts_unproved.dat = cases.at("dat").get<int>();
  for (const auto& sj : j.at("trace")) {
    RuleApplication step;
    std::string rn = sj.at("rule").get<std::string>();
    auto rule = rule_from_name(rn);
    if (!rule) throw CommandError("unknown rule '" + rn + "'");
    step.rule = *rule;
    step.inputs = sj.at("inputs").get<std::vector<std::string>>();
    step.outputs = sj.at("outputs").get<std::vector<std::string>>();
    d.trace.steps.push_back(std::move(step));
  }
  return d;
}

Lexicon load_kb(const std::string& path) {
  if (path.empty()) return Lexicon{};
  return load_lexicon(path);
}

}  // namespace

std::string file_hash(const std::string& path) {
  if (path.empty()) return "-";
  return hex64(fnv1a(read_file(path)));
}

void cmd_prove(const ProveArgs& args) {
  RunConfig cfg = resolve_config(args.config, args.seed);
  Corpus corpus = load_corpus(args.corpus);
  Lexicon kb = load_kb(args.kb);
  ProverConfig pc;
  pc.step_budget = cfg.step_budget;
  pc.lexicon.require_same_case = cfg.require_same_case;
  pc.lexicon.disconnected_probability = cfg.disconnected_probability;

  std::vector<std::string> records(corpus.entries.size());
  parallel_for(corpus.entries.size(), args.jobs, [&](std::size_t i) {
    const CorpusEntry& e = corpus.entries[i];
    nlohmann::json rec;
    rec["id"] = e.id;
    if (!e.error.empty()) {
      rec["error"] = "line " + std::to_string(e.line) + ": " + e.error;
    } else {
      BidirectionalResult r = run_pipeline(e.formula1, e.formula2, kb, pc);
      rec["forward"] = direction_to_json(r.forward);
      rec["backward"] = direction_to_json(r.backward);
    }
    records[i] = rec.dump();
  });

  std::ostringstream out;
  nlohmann::json header;
  header["meta"] = make_meta("ndsts-proofs", cfg,
                             {{"corpus", file_hash(args.corpus)},
                              {"kb", file_hash(args.kb)}});
  out << header.dump() << '\n';
  for (const std::string& r : records) out << r << '\n';
  write_file(args.out, out.str());
}

StoredProofs proofs_from_file(const std::string& path) {
  std::istringstream in(read_file(path));
  StoredProofs proofs;
  std::string line;
  bool have_meta = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
      if (!have_meta) {
        const nlohmann::json& meta = rec.at("meta");
        check_meta(meta, "ndsts-proofs", path);
        proofs.config = config_from_json(meta.at("config").dump());
        for (const auto& [k, v] : meta.at("inputs").items())
          proofs.input_hashes[k] = v.get<std::string>();
        have_meta = true;
        continue;
      }
      StoredProofs::Entry e;
      e.id = rec.at("id").get<std::string>();
      if (rec.contains("error")) {
        e.error = rec.at("error").get<std::string>();
      } else {
        e.result.forward = direction_from_json(rec.at("forward"));
        e.result.backward = direction_from_json(rec.at("backward"));
      }
      proofs.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw CommandError(path + " line " + std::to_string(line_no) + ": " +
                         ex.what());
    } catch (const FormulaError& ex) {
      throw CommandError(path + " line " + std::to_string(line_no) + ": " +
                         ex.what());
    }
  }
  if (!have_meta) throw CommandError(path + ": missing meta record");
  return proofs;
}

namespace {

struct ScalerBundle {
  Scaler scaler;
  CorpusStats stats;
  std::string serialized;  // exact bytes written to / read from disk
};

std::string scaler_to_json(const Scaler& scaler, const CorpusStats& stats,
                           const RunConfig& cfg,
                           const std::map<std::string, std::string>& inputs) {
  nlohmann::json j = make_meta("ndsts-scaler", cfg, inputs);
  j["schema_hash"] = hex64(feature_schema_hash());
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& [lo, hi] : scaler.bounds) bounds.push_back({lo, hi});
  j["bounds"] = bounds;
  j["stats"] = {{"documents", stats.documents}, {"doc_freq", stats.doc_freq}};
  return j.dump();
}

ScalerBundle scaler_from_json(const std::string& text, const std::string& path) {
  ScalerBundle b;
  b.serialized = text;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    check_meta(j, "ndsts-scaler", path);
    if (j.at("schema_hash").get<std::string>() != hex64(feature_schema_hash()))
      throw CommandError(path + ": scaler was fitted for a different feature schema");
    for (const auto& pair : j.at("bounds"))
      b.scaler.bounds.emplace_back(pair.at(0).get<double>(),
                                   pair.at(1).get<double>());
    b.stats.documents = j.at("stats").at("documents").get<int>();
    b.stats.doc_freq =
        j.at("stats").at("doc_freq").get<std::map<std::string, int>>();
  } catch (const nlohmann::json::exception& ex) {
    throw CommandError(path + ": " + ex.what());
  }
  if (b.scaler.bounds.size() != feature_schema().size())
    throw CommandError(path + ": bounds length does not match the schema");
  return b;
}

PairInput pair_input(const CorpusEntry& e) {
  PairInput in;
  in.sentence1 = e.sentence1;
  in.sentence2 = e.sentence2;
  in.annotation1 = e.annotation1;
  in.annotation2 = e.annotation2;
  in.formula1 = e.formula1;
  in.formula2 = e.formula2;
  return in;
}

void require_aligned(const Corpus& corpus, const StoredProofs& proofs,
                     const std::string& proofs_path) {
  if (corpus.entries.size() != proofs.entries.size())
    throw CommandError(proofs_path + ": proofs cover " +
                       std::to_string(proofs.entries.size()) +
                       " entries but the corpus has " +
                       std::to_string(corpus.entries.size()));
  for (std::size_t i = 0; i < corpus.entries.size(); ++i)
    if (corpus.entries[i].id != proofs.entries[i].id)
      throw CommandError(proofs_path + ": id mismatch at position " +
                         std::to_string(i) + ": corpus '" +
                         corpus.entries[i].id + "' vs proofs '" +
                         proofs.entries[i].id + "'");
}

}  // namespace

void cmd_features(const FeaturesArgs& args) {
  Corpus corpus = load_corpus(args.corpus);
  StoredProofs proofs = proofs_from_file(args.proofs);
  // Config flows through the pipeline: inherit from the proofs unless given.
  RunConfig cfg = args.config.empty() ? proofs.config
                                      : resolve_config(args.config, args.seed);
  if (args.config.empty() && args.seed) cfg.seed = *args.seed;
  require_aligned(corpus, proofs, args.proofs);
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    if (!corpus.entries[i].error.empty())
      throw CommandError("entry '" + corpus.entries[i].id +
                         "' failed to load: " + corpus.entries[i].error);
    if (!proofs.entries[i].error.empty())
      throw CommandError("entry '" + proofs.entries[i].id +
                         "' has no proof: " + proofs.entries[i].error);
  }
  Lexicon kb = load_kb(args.kb);

  ScalerBundle bundle;
  std::string scaler_path = args.scaler_out.empty() ? args.out + ".scaler.json"
                                                    : args.scaler_out;
  if (!args.fit_split.empty()) {
    std::vector<std::size_t> fit =
        split_rows(args.fit_split, corpus.entries.size());
    if (fit.empty()) throw CommandError("fit split selects no rows");
    std::vector<std::vector<std::string>> docs;
    for (std::size_t i : fit) {
      docs.push_back(corpus.entries[i].annotation1.tokens);
      docs.push_back(corpus.entries[i].annotation2.tokens);
    }
    bundle.stats = CorpusStats::fit(docs);
    std::vector<std::vector<double>> fit_rows;
    for (std::size_t i : fit)
      fit_rows.push_back(raw_features(pair_input(corpus.entries[i]),
                                      proofs.entries[i].result, kb,
                                      bundle.stats));
    bundle.scaler = Scaler::fit(fit_rows);
    bundle.serialized =
        scaler_to_json(bundle.scaler, bundle.stats, cfg,
                       {{"corpus", file_hash(args.corpus)},
                        {"proofs", file_hash(args.proofs)},
                        {"kb", file_hash(args.kb)}});
    write_file(scaler_path, bundle.serialized);
  } else {
    if (args.scaler_in.empty())
      throw CommandError("either --fit-split or --scaler is required");
    bundle = scaler_from_json(read_file(args.scaler_in), args.scaler_in);
  }

  std::vector<std::vector<double>> rows(corpus.entries.size());
  parallel_for(corpus.entries.size(), args.jobs, [&](std::size_t i) {
    rows[i] = assemble(pair_input(corpus.entries[i]), proofs.entries[i].result,
                       kb, bundle.stats, bundle.scaler);
  });

  nlohmann::json meta = make_meta(
      "ndsts-features", cfg,
      {{"corpus", file_hash(args.corpus)},
       {"proofs", file_hash(args.proofs)},
       {"kb", file_hash(args.kb)},
       {"scaler", hex64(fnv1a(bundle.serialized))}});
  meta["schema_hash"] = hex64(feature_schema_hash());

  std::ostringstream out;
  out << "# " << meta.dump() << '\n';
  out << "id,gold_score,gold_label";
  for (const FeatureSpec& f : feature_schema()) out << ',' << f.name;
  out << '\n';
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const CorpusEntry& e = corpus.entries[i];
    out << e.id << ',' << format_double(e.gold_score) << ',' << e.gold_label;
    for (double v : rows[i]) out << ',' << format_double(v);
    out << '\n';
  }
  write_file(args.out, out.str());
}

FeatureTable features_from_file(const std::string& path) {
  std::istringstream in(read_file(path));
  FeatureTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw CommandError(path + ": missing meta line");
  try {
    nlohmann::json meta = nlohmann::json::parse(line.substr(2));
    check_meta(meta, "ndsts-features", path);
    table.config = config_from_json(meta.at("config").dump());
    for (const auto& [k, v] : meta.at("inputs").items())
      table.input_hashes[k] = v.get<std::string>();
    table.schema_hash =
        std::stoull(meta.at("schema_hash").get<std::string>(), nullptr, 16);
  } catch (const nlohmann::json::exception& ex) {
    throw CommandError(path + ": " + ex.what());
  }
  if (!std::getline(in, line)) throw CommandError(path + ": missing header");
  std::string expected = "id,gold_score,gold_label";
  for (const FeatureSpec& f : feature_schema()) expected += "," + f.name;
  if (line != expected)
    throw CommandError(path + ": header does not match the feature schema");

  std::size_t n_cols = feature_schema().size();
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (cells.size() != n_cols + 3)
      throw CommandError(path + " line " + std::to_string(line_no) +
                         ": expected " + std::to_string(n_cols + 3) +
                         " cells, found " + std::to_string(cells.size()));
    auto parse_cell = [&](const std::string& cell) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || p != cell.data() + cell.size())
        throw CommandError(path + " line " + std::to_string(line_no) +
                           ": bad number '" + cell + "'");
      return v;
    };
    table.ids.push_back(cells[0]);
    table.gold_scores.push_back(parse_cell(cells[1]));
    table.gold_labels.push_back(cells[2]);
    std::vector<double> row;
    for (std::size_t c = 3; c < cells.size(); ++c)
      row.push_back(parse_cell(cells[c]));
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

struct LoadedModel {
  RunConfig config;
  RandomForest forest;
};

LoadedModel model_from_file(const std::string& path) {
  LoadedModel m;
  try {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    check_meta(j, "ndsts-model", path);
    m.config = config_from_json(j.at("config").dump());
    m.forest = forest_from_json(j.at("forest").dump());
  } catch (const nlohmann::json::exception& ex) {
    throw CommandError(path + ": " + ex.what());
  } catch (const LearnError& ex) {
    throw CommandError(path + ": " + ex.what());
  }
  return m;
}

void require_schema_match(const RandomForest& forest, const FeatureTable& table,
                          const std::string& model_path,
                          const std::string& features_path) {
  if (forest.schema_hash != table.schema_hash)
    throw CommandError("schema hash mismatch: model " + model_path + " has " +
                       hex64(forest.schema_hash) + ", features " +
                       features_path + " have " + hex64(table.schema_hash));
  if (table.schema_hash != feature_schema_hash())
    throw CommandError(features_path +
                       ": features use a different schema than this build");
}

}  // namespace

void cmd_train(const TrainArgs& args) {
  FeatureTable table = features_from_file(args.features);
  if (table.schema_hash != feature_schema_hash())
    throw CommandError(args.features +
                       ": features use a different schema than this build");
  RunConfig cfg = args.config.empty() ? table.config
                                      : resolve_config(args.config, args.seed);
  if (args.config.empty() && args.seed) cfg.seed = *args.seed;

  std::vector<std::size_t> rows = split_rows(cfg.split, table.rows.size());
  if (rows.size() < 2)
    throw CommandError("split '" + cfg.split + "' selects fewer than 2 rows");
  Matrix X;
  std::vector<double> y;
  for (std::size_t i : rows) {
    X.push_back(table.rows[i]);
    y.push_back(table.gold_scores[i]);
  }
  std::vector<ForestParams> grid =
      cfg.grid.empty() ? default_grid(X[0].size()) : cfg.grid;
  int k = std::min<int>(cfg.k_folds, static_cast<int>(rows.size()));
  ForestParams best;
  try {
    best = grid_search(X, y, grid, k, cfg.seed);
  } catch (const LearnError& ex) {
    throw CommandError(std::string("grid search failed: ") + ex.what());
  }
  RandomForest forest;
  try {
    forest = fit_forest(X, y, best, cfg.seed, feature_schema_hash());
  } catch (const LearnError& ex) {
    throw CommandError(std::string("training failed: ") + ex.what());
  }

  nlohmann::json j =
      make_meta("ndsts-model", cfg, {{"features", file_hash(args.features)}});
  j["chosen_params"] = {{"n_trees", best.n_trees},
                        {"max_depth", best.max_depth},
                        {"min_samples_leaf", best.min_samples_leaf},
                        {"features_per_split", best.features_per_split},
                        {"bootstrap", best.bootstrap}};
  j["trained_rows"] = rows.size();
  j["forest"] = nlohmann::json::parse(forest_to_json(forest));
  write_file(args.out, j.dump());
}

void cmd_predict(const PredictArgs& args) {
  LoadedModel model = model_from_file(args.model);
  FeatureTable table = features_from_file(args.features);
  require_schema_match(model.forest, table, args.model, args.features);
  std::vector<double> pred = model.forest.predict_all(table.rows);

  nlohmann::json meta = make_meta("ndsts-predictions", model.config,
                                  {{"model", file_hash(args.model)},
                                   {"features", file_hash(args.features)}});
  std::ostringstream out;
  out << "# " << meta.dump() << '\n';
  out << "id,prediction\n";
  for (std::size_t i = 0; i < table.ids.size(); ++i)
    out << table.ids[i] << ',' << format_double(pred[i]) << '\n';
  write_file(args.out, out.str());
}

void cmd_eval(const EvalArgs& args) {
  LoadedModel model = model_from_file(args.model);
  FeatureTable table = features_from_file(args.features);
  require_schema_match(model.forest, table, args.model, args.features);
  if (table.rows.empty()) throw CommandError(args.features + ": no rows");
  std::vector<double> pred = model.forest.predict_all(table.rows);
  EvalReport model_report = metrics(pred, table.gold_scores);

  bool have_labels = true;
  for (const std::string& label : table.gold_labels)
    if (label.empty()) have_labels = false;
  std::vector<double> base;
  EvalReport base_report;
  if (have_labels) {
    try {
      for (const std::string& label : table.gold_labels)
        base.push_back(baseline_score(label));
    } catch (const LearnError& ex) {
      throw CommandError(ex.what());
    }
    base_report = metrics(base, table.gold_scores);
  }

  auto report_json = [](const EvalReport& r) {
    return nlohmann::json{{"pearson", r.pearson},
                          {"spearman", r.spearman},
                          {"mse", r.mse},
                          {"degenerate", r.degenerate}};
  };
  nlohmann::json j = make_meta("ndsts-eval", model.config,
                               {{"model", file_hash(args.model)},
                                {"features", file_hash(args.features)}});
  j["model_metrics"] = report_json(model_report);
  j["baseline_metrics"] =
      have_labels ? report_json(base_report) : nlohmann::json();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    nlohmann::json row;
    row["id"] = table.ids[i];
    row["gold"] = table.gold_scores[i];
    row["prediction"] = pred[i];
    if (have_labels) row["baseline"] = base[i];
    rows.push_back(row);
  }
  j["rows"] = rows;
  write_file(args.out, j.dump());
}

namespace {

void explain_direction(std::ostream& os, const char* name,
                       const DirectionResult& d) {
  os << name << ":\n";
  os << "  status: " << status_json_name(d.status) << '\n';
  os << "  premise pool:\n";
  for (const std::string& p : d.premise_pool) os << "    " << p << '\n';
  os << "  matched sub-goals:\n";
  if (d.matched_subgoals.empty()) os << "    (none)\n";
  for (const FormulaPtr& f : d.matched_subgoals)
    os << "    " << print_formula(f) << '\n';
  if (d.axioms_used.empty()) {
    os << "  axioms used: none\n";
  } else {
    os << "  axioms used:\n";
    for (const Axiom& a : d.axioms_used)
      os << "    " << a.source << " => " << (a.negated ? "not " : "")
         << a.target << "  (" << relation_name(a.relation) << ", probability "
         << format_double(a.probability) << ")\n";
  }
  if (d.skipped_subgoals.empty()) {
    os << "  no skipped sub-goals\n";
  } else {
    os << "  skipped sub-goals:\n";
    for (const FormulaPtr& f : d.skipped_subgoals)
      os << "    " << print_formula(f) << '\n';
  }
  for (const RuleApplication& s : d.trace.steps)
    if (s.rule == Rule::NegElim && s.inputs.size() >= 2) {
      os << "  negative premise: " << s.inputs[1] << '\n';
      break;
    }
  os << "  rule histogram:\n";
  auto hist = d.trace.histogram();
  bool any = false;
  for (int r = 0; r < kRuleCount; ++r)
    if (hist[r] > 0) {
      os << "    " << rule_name(static_cast<Rule>(r)) << ": " << hist[r] << '\n';
      any = true;
    }
  if (!any) os << "    (empty)\n";
  os << "  proof steps: " << d.trace.proof_steps() << '\n';
}

}  // namespace

void cmd_explain(const ExplainArgs& args, std::ostream& os) {
  StoredProofs proofs = proofs_from_file(args.proofs);
  const StoredProofs::Entry* entry = nullptr;
  for (const StoredProofs::Entry& e : proofs.entries)
    if (e.id == args.id) entry = &e;
  if (!entry) throw CommandError("unknown id '" + args.id + "'");
  os << "pair " << entry->id << '\n';
  if (!entry->error.empty()) {
    os << "error: " << entry->error << '\n';
    return;
  }
  explain_direction(os, "forward", entry->result.forward);
  explain_direction(os, "backward", entry->result.backward);
}

void cmd_check(const CheckArgs& args, std::ostream& os) {
  RunConfig cfg = load_config(args.config);
  Corpus corpus = load_corpus(args.corpus);
  StoredProofs proofs = proofs_from_file(args.proofs);
  require_aligned(corpus, proofs, args.proofs);

  int checked = 0, agreed = 0, disagreed = 0, unchecked = 0;
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const CorpusEntry& e = corpus.entries[i];
    const StoredProofs::Entry& p = proofs.entries[i];
    if (!e.error.empty() || !p.error.empty()) {
      ++unchecked;
      continue;
    }
    struct Side {
      const char* name;
      const DirectionResult* d;
      FormulaPtr premise, conclusion;
    };
    Side sides[2] = {{"forward", &p.result.forward, e.formula1, e.formula2},
                     {"backward", &p.result.backward, e.formula2, e.formula1}};
    for (const Side& side : sides) {
      const DirectionResult& d = *side.d;
      bool checkable = d.axioms_used.empty() &&
                       (d.status == ProofStatus::Proved ||
                        d.status == ProofStatus::NegationProved);
      if (d.status == ProofStatus::Proved && !d.skipped_subgoals.empty())
        checkable = false;
      if (!checkable) {
        ++unchecked;
        continue;
      }
      bool ok;
      try {
        if (d.status == ProofStatus::Proved)
          ok = entails_bounded(side.premise, side.conclusion, cfg.oracle_bound);
        else
          ok = !satisfiable_bounded({side.premise, side.conclusion},
                                    cfg.oracle_bound);
      } catch (const OracleError& ex) {
        ++unchecked;
        os << e.id << ' ' << side.name << ' ' << status_json_name(d.status)
           << ": not checkable (" << ex.what() << ")\n";
        continue;
      }
      ++checked;
      if (ok) {
        ++agreed;
        os << e.id << ' ' << side.name << ' ' << status_json_name(d.status)
           << ": agrees\n";
      } else {
        ++disagreed;
        os << e.id << ' ' << side.name << ' ' << status_json_name(d.status)
           << ": DISAGREES\n";
      }
    }
  }
  os << "summary: " << checked << " checked, " << agreed << " agree, "
     << disagreed << " disagree, " << unchecked
     << " not checkable (bound " << cfg.oracle_bound << ")\n";
  if (disagreed > 0)
    throw CommandError("oracle disagreement on " + std::to_string(disagreed) +
                       " proof(s)");
}

}  // namespace ndsts
