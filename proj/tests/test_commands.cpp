#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "ndsts/commands.hpp"
#include "ndsts/features.hpp"
#include "ndsts/util.hpp"

using namespace ndsts;
namespace fs = std::filesystem;

namespace {

const std::string kData = NDSTS_DATA_DIR;
const std::string kCorpus = kData + "/mini_corpus.jsonl";
const std::string kKb = kData + "/mini_kb.jsonl";
const std::string kConfig = kData + "/config.json";
const std::string kGolden = NDSTS_GOLDEN_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("ndsts_cmd_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// One pipeline run on the bundled mini corpus, shared across test cases.
struct MiniRun {
  TempDir dir;
  std::string proofs, feats, scaler, model, preds, report;
  MiniRun() {
    proofs = dir.file("proofs.jsonl");
    feats = dir.file("features.csv");
    scaler = dir.file("scaler.json");
    model = dir.file("model.json");
    preds = dir.file("predictions.csv");
    report = dir.file("report.json");
    cmd_prove({kCorpus, kKb, kConfig, proofs, std::nullopt, 2});
    cmd_features({kCorpus, proofs, kKb, "", feats, "all", "", scaler,
                  std::nullopt, 2});
    cmd_train({feats, "", model, std::nullopt});
    cmd_predict({model, feats, preds});
    cmd_eval({model, feats, report});
  }
};

const MiniRun& mini_run() {
  static MiniRun run;
  return run;
}

const StoredProofs::Entry& find_entry(const StoredProofs& p,
                                      const std::string& id) {
  for (const auto& e : p.entries)
    if (e.id == id) return e;
  REQUIRE(false);
  std::abort();
}

std::string tiny_corpus_line(const std::string& id, const std::string& f1,
                             const std::string& f2) {
  return "{\"id\":\"" + id +
         "\",\"sentence1\":\"a\",\"sentence2\":\"b\","
         "\"annotation1\":{\"tokens\":[\"a\"],\"lemmas\":[\"a\"],\"pos\":[\"DT\"]},"
         "\"annotation2\":{\"tokens\":[\"b\"],\"lemmas\":[\"b\"],\"pos\":[\"DT\"]},"
         "\"formula1\":\"" +
         f1 + "\",\"formula2\":\"" + f2 + "\",\"gold_score\":3.0}\n";
}

}  // namespace

TEST_CASE("prove emits one record per pair with lowercase statuses") {
  const MiniRun& run = mini_run();
  StoredProofs p = proofs_from_file(run.proofs);
  CHECK(p.entries.size() == 20);
  CHECK(p.config.seed == 7);
  CHECK(p.input_hashes.at("corpus") == file_hash(kCorpus));
  CHECK(p.input_hashes.at("kb") == file_hash(kKb));

  const auto& bar_pair = find_entry(p, "sing-in-bar");
  CHECK(bar_pair.result.forward.status == ProofStatus::Proved);
  CHECK(bar_pair.result.backward.status == ProofStatus::ProvedWithSkips);
  std::set<std::string> skipped;
  for (const auto& f : bar_pair.result.backward.skipped_subgoals)
    skipped.insert(print_formula(f));
  CHECK(skipped == std::set<std::string>{"bar(x2)", "in(e1, x2)"});
  CHECK(bar_pair.result.backward.subgoal_stats.total_subgoals == 5);
  CHECK(bar_pair.result.backward.subgoal_stats.proved_after_injection == 3);

  std::string raw = read_file(run.proofs);
  CHECK(raw.find("\"proved_with_skips\"") != std::string::npos);
  CHECK(raw.find("\"negation_proved\"") != std::string::npos);
  CHECK(raw.find("ProvedWithSkips") == std::string::npos);
}

TEST_CASE("stored contradiction keeps its trace and axioms") {
  StoredProofs p = proofs_from_file(mini_run().proofs);
  const auto& neg_pair = find_entry(p, "no-sing-loud");
  CHECK(neg_pair.result.forward.status == ProofStatus::NegationProved);
  CHECK(neg_pair.result.backward.status == ProofStatus::NegationProved);
  auto hist = neg_pair.result.forward.trace.histogram();
  CHECK(hist[static_cast<int>(Rule::NegElim)] >= 1);
  CHECK(hist[static_cast<int>(Rule::ExistsIntro)] >= 1);

  const auto& hyper = find_entry(p, "man-person");
  REQUIRE(hyper.result.forward.axioms_used.size() == 1);
  const Axiom& ax = hyper.result.forward.axioms_used[0];
  CHECK(ax.source == "man");
  CHECK(ax.target == "person");
  CHECK(ax.relation == RelationKind::Hypernym);
  CHECK(ax.probability == doctest::Approx(0.5));
  CHECK(!ax.negated);

  const auto& anto = find_entry(p, "remove-add");
  CHECK(anto.result.forward.status == ProofStatus::NegationProved);
  REQUIRE(anto.result.forward.axioms_used.size() == 1);
  CHECK(anto.result.forward.axioms_used[0].negated);
}

TEST_CASE("prove is byte-deterministic across runs and job counts") {
  const MiniRun& run = mini_run();
  TempDir dir;
  std::string again = dir.file("proofs.jsonl");
  cmd_prove({kCorpus, kKb, kConfig, again, std::nullopt, 4});
  CHECK(read_file(again) == read_file(run.proofs));
}

TEST_CASE("feature csv matches the schema and stays within bounds") {
  const MiniRun& run = mini_run();
  FeatureTable t = features_from_file(run.feats);
  CHECK(t.ids.size() == 20);
  CHECK(t.schema_hash == feature_schema_hash());
  CHECK(t.ids[0] == "sing-in-bar");
  CHECK(t.gold_scores[0] == 4.4);
  CHECK(t.gold_labels[0] == "yes");
  CHECK(t.input_hashes.at("corpus") == file_hash(kCorpus));
  CHECK(t.input_hashes.count("scaler") == 1);
  for (const auto& row : t.rows) {
    REQUIRE(row.size() == feature_schema().size());
    for (double v : row) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("sing-in-bar feature row matches the frozen reference") {
  std::istringstream generated(read_file(mini_run().feats));
  std::string meta, header, line, bar_pair;
  std::getline(generated, meta);
  std::getline(generated, header);
  while (std::getline(generated, line))
    if (line.rfind("sing-in-bar,", 0) == 0) bar_pair = line;
  REQUIRE(!bar_pair.empty());

  std::istringstream golden(read_file(kGolden + "/sing_in_bar_features_row.csv"));
  std::string golden_header, golden_row;
  std::getline(golden, golden_header);
  std::getline(golden, golden_row);
  CHECK(header == golden_header);
  CHECK(bar_pair == golden_row);
}

TEST_CASE("features rerun with the saved scaler is byte-identical") {
  const MiniRun& run = mini_run();
  TempDir dir;
  std::string refit = dir.file("refit.csv");
  std::string reuse = dir.file("reuse.csv");
  cmd_features({kCorpus, run.proofs, kKb, "", refit, "all", "",
                dir.file("s.json"), std::nullopt, 1});
  cmd_features({kCorpus, run.proofs, kKb, "", reuse, "", run.scaler, "",
                std::nullopt, 1});
  CHECK(read_file(refit) == read_file(run.feats));
  CHECK(read_file(reuse) == read_file(run.feats));
}

TEST_CASE("features demands an id-matched proofs file") {
  TempDir dir;
  std::string corpus_a = dir.file("a.jsonl");
  std::string corpus_b = dir.file("b.jsonl");
  write_file(corpus_a, tiny_corpus_line("one", "exists e1 . run(e1)",
                                        "exists e1 . run(e1)"));
  write_file(corpus_b, tiny_corpus_line("two", "exists e1 . run(e1)",
                                        "exists e1 . run(e1)"));
  std::string proofs = dir.file("p.jsonl");
  cmd_prove({corpus_a, "", "", proofs, std::nullopt, 1});
  CHECK_THROWS_WITH_AS(
      cmd_features({corpus_b, proofs, "", "", dir.file("f.csv"), "all", "", "",
                    std::nullopt, 1}),
      doctest::Contains("id mismatch"), CommandError);
}

TEST_CASE("entries that fail to load surface as error records") {
  TempDir dir;
  std::string corpus = dir.file("c.jsonl");
  write_file(corpus,
             tiny_corpus_line("broken", "exists e1 . run(e1", "run(e1)") +
                 tiny_corpus_line("fine", "exists e1 . run(e1)",
                                  "exists e1 . run(e1)"));
  std::string proofs = dir.file("p.jsonl");
  cmd_prove({corpus, "", "", proofs, std::nullopt, 1});
  StoredProofs p = proofs_from_file(proofs);
  REQUIRE(p.entries.size() == 2);
  CHECK(p.entries[0].error.find("1:19") != std::string::npos);
  CHECK(p.entries[1].error.empty());
  CHECK(p.entries[1].result.forward.status == ProofStatus::Proved);
  // downstream extraction refuses the broken entry
  CHECK_THROWS_AS(cmd_features({corpus, proofs, "", "", dir.file("f.csv"),
                                "all", "", "", std::nullopt, 1}),
                  CommandError);
}

TEST_CASE("empty corpus proves to an empty results file") {
  TempDir dir;
  std::string corpus = dir.file("empty.jsonl");
  write_file(corpus, "");
  std::string proofs = dir.file("p.jsonl");
  cmd_prove({corpus, "", "", proofs, std::nullopt, 1});
  StoredProofs p = proofs_from_file(proofs);
  CHECK(p.entries.empty());
}

TEST_CASE("training is seed-reproducible and refuses foreign schemas") {
  const MiniRun& run = mini_run();
  TempDir dir;
  std::string again = dir.file("model.json");
  cmd_train({run.feats, "", again, std::nullopt});
  CHECK(read_file(again) == read_file(run.model));
  CHECK(fnv1a(read_file(again)) == fnv1a(read_file(run.model)));

  std::string other = dir.file("model9.json");
  cmd_train({run.feats, "", other, 9});
  CHECK(read_file(other) != read_file(run.model));

  // tamper with the schema hash in the csv meta line
  std::string csv = read_file(run.feats);
  std::size_t pos = csv.find("\"schema_hash\":\"");
  REQUIRE(pos != std::string::npos);
  csv.replace(pos + 15, 16, "0000000000000000");
  std::string tampered = dir.file("tampered.csv");
  write_file(tampered, csv);
  CHECK_THROWS_AS(cmd_train({tampered, "", dir.file("m.json"), std::nullopt}),
                  CommandError);
  CHECK_THROWS_WITH_AS(cmd_predict({run.model, tampered, dir.file("p.csv")}),
                       doctest::Contains("schema hash mismatch"), CommandError);
}

TEST_CASE("model and report embed the run config and input hashes") {
  const MiniRun& run = mini_run();
  nlohmann::json model = nlohmann::json::parse(read_file(run.model));
  CHECK(model.at("format") == "ndsts-model");
  CHECK(model.at("config").at("seed") == 7);
  CHECK(model.at("inputs").at("features") == file_hash(run.feats));
  CHECK(model.at("forest").at("trees").is_array());

  nlohmann::json report = nlohmann::json::parse(read_file(run.report));
  CHECK(report.at("format") == "ndsts-eval");
  CHECK(report.at("config").at("seed") == 7);
  CHECK(report.at("inputs").at("model") == file_hash(run.model));
  CHECK(report.at("rows").size() == 20);
}

TEST_CASE("eval reports model metrics alongside the label baseline") {
  nlohmann::json report = nlohmann::json::parse(read_file(mini_run().report));
  double model_mse = report.at("model_metrics").at("mse").get<double>();
  double base_mse = report.at("baseline_metrics").at("mse").get<double>();
  CHECK(model_mse <= base_mse);
  CHECK(report.at("model_metrics").at("pearson").get<double>() > 0.5);
  // baseline: yes -> 5.0, no/unknown -> 3.0
  for (const auto& row : report.at("rows")) {
    double b = row.at("baseline").get<double>();
    CHECK((b == 5.0 || b == 3.0));
  }
  // in-sample sanity floor: mse below the variance of y
  std::vector<double> gold;
  for (const auto& row : report.at("rows"))
    gold.push_back(row.at("gold").get<double>());
  double mean = 0.0;
  for (double g : gold) mean += g;
  mean /= static_cast<double>(gold.size());
  double var = 0.0;
  for (double g : gold) var += (g - mean) * (g - mean);
  var /= static_cast<double>(gold.size());
  CHECK(model_mse < var);
}

TEST_CASE("predictions csv lists every id in corpus order") {
  const MiniRun& run = mini_run();
  std::istringstream in(read_file(run.preds));
  std::string meta, header, line;
  std::getline(in, meta);
  std::getline(in, header);
  CHECK(meta.rfind("# ", 0) == 0);
  CHECK(header == "id,prediction");
  std::vector<std::string> ids;
  while (std::getline(in, line))
    ids.push_back(line.substr(0, line.find(',')));
  FeatureTable t = features_from_file(run.feats);
  CHECK(ids == t.ids);
}

TEST_CASE("explain narrates pools, skips and negative premises") {
  const MiniRun& run = mini_run();
  std::ostringstream bar_pair;
  cmd_explain({run.proofs, "sing-in-bar"}, bar_pair);
  CHECK(bar_pair.str().find("bar(x2)") != std::string::npos);
  CHECK(bar_pair.str().find("in(e1, x2)") != std::string::npos);
  CHECK(bar_pair.str().find("skipped sub-goals") != std::string::npos);
  CHECK(bar_pair.str().find("P2: man(x1)") != std::string::npos);
  CHECK(bar_pair.str().find("rule histogram") != std::string::npos);

  std::ostringstream same;
  cmd_explain({run.proofs, "onion-same"}, same);
  CHECK(same.str().find("no skipped sub-goals") != std::string::npos);

  std::ostringstream neg_pair;
  cmd_explain({run.proofs, "no-sing-loud"}, neg_pair);
  CHECK(neg_pair.str().find("negative premise: P0") != std::string::npos);

  std::ostringstream axioms;
  cmd_explain({run.proofs, "man-person"}, axioms);
  CHECK(axioms.str().find("man => person  (hypernym, probability 0.5)") !=
        std::string::npos);

  std::ostringstream sink;
  CHECK_THROWS_WITH_AS(cmd_explain({run.proofs, "nope"}, sink),
                       doctest::Contains("unknown id"), CommandError);
}

TEST_CASE("check agrees with the oracle on the mini corpus") {
  const MiniRun& run = mini_run();
  std::ostringstream os;
  cmd_check({kCorpus, run.proofs, kConfig}, os);
  CHECK(os.str().find(" 0 disagree") != std::string::npos);
  CHECK(os.str().find("no-sing-loud forward negation_proved: agrees") !=
        std::string::npos);
}

TEST_CASE("check flags proofs the oracle rejects") {
  TempDir dir;
  std::string corpus = dir.file("c.jsonl");
  write_file(corpus, tiny_corpus_line("fake", "exists e1 . run(e1)",
                                      "exists e1 . sleep(e1)"));
  nlohmann::json dir_json = {
      {"status", "proved"},   {"axioms", nlohmann::json::array()},
      {"skipped", nlohmann::json::array()},
      {"matched", nlohmann::json::array()},
      {"pool", nlohmann::json::array()},
      {"stats",
       {{"total_subgoals", 1}, {"proved_before", 1}, {"proved_after", 1},
        {"pool_size", 1}}},
      {"cases", {{"subj", 0}, {"obj", 0}, {"dat", 0}}},
      {"trace", nlohmann::json::array()}};
  nlohmann::json meta;
  meta["meta"] = {{"format", "ndsts-proofs"},
                  {"version", 1},
                  {"config", nlohmann::json::parse(config_to_json({}))},
                  {"inputs", nlohmann::json::object()}};
  nlohmann::json rec = {{"id", "fake"}, {"forward", dir_json},
                        {"backward", dir_json}};
  std::string proofs = dir.file("p.jsonl");
  write_file(proofs, meta.dump() + "\n" + rec.dump() + "\n");
  std::ostringstream os;
  CHECK_THROWS_WITH_AS(cmd_check({corpus, proofs, ""}, os),
                       doctest::Contains("disagreement"), CommandError);
  CHECK(os.str().find("DISAGREES") != std::string::npos);
}

TEST_CASE("trace jsonl export carries step, rule and labels") {
  std::set<std::string> known_rules;
  for (int i = 0; i < kRuleCount; ++i)
    known_rules.insert(rule_name(static_cast<Rule>(i)));

  StoredProofs p = proofs_from_file(mini_run().proofs);
  const auto& bar_pair = find_entry(p, "sing-in-bar");
  std::string jsonl = trace_to_jsonl(bar_pair.result.forward.trace);
  std::istringstream in(jsonl);
  std::string line;
  int step = 0;
  while (std::getline(in, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.at("step") == step++);
    CHECK(j.at("inputs").is_array());
    CHECK(j.at("outputs").is_array());
    CHECK(known_rules.count(j.at("rule").get<std::string>()) == 1);
  }
  CHECK(step == static_cast<int>(bar_pair.result.forward.trace.steps.size()));
}
