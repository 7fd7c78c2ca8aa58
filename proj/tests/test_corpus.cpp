#include <sstream>

#include "doctest.h"
#include "ndsts/corpus.hpp"

using namespace ndsts;

namespace {

std::string entry_line(const std::string& id, const std::string& f1,
                       const std::string& f2, double score,
                       const std::string& label = "yes") {
  std::ostringstream os;
  os << "{\"id\":\"" << id << "\",\"sentence1\":\"s one\",\"sentence2\":\"s two\","
     << "\"annotation1\":{\"tokens\":[\"s\",\"one\"],\"lemmas\":[\"s\",\"one\"],"
     << "\"pos\":[\"NN\",\"NN\"],\"nouns\":[\"s\"],\"verbs\":[],\"passive\":false},"
     << "\"annotation2\":{\"tokens\":[\"s\",\"two\"],\"lemmas\":[\"s\",\"two\"],"
     << "\"pos\":[\"NN\",\"NN\"],\"nouns\":[\"s\"],\"verbs\":[],\"passive\":true},"
     << "\"formula1\":\"" << f1 << "\",\"formula2\":\"" << f2 << "\","
     << "\"gold_score\":" << score;
  if (!label.empty()) os << ",\"gold_label\":\"" << label << "\"";
  os << "}";
  return os.str();
}

}  // namespace

TEST_CASE("corpus loads entries with parsed formulas and annotations") {
  std::istringstream in(
      entry_line("p1", "exists e1 . run(e1)", "exists e1 . jog(e1)", 4.0) +
      "\n" +
      entry_line("p2", "exists x1 . dog(x1)", "exists x1 . cat(x1)", 2.5,
                 "unknown") +
      "\n");
  Corpus c = corpus_from_jsonl(in);
  REQUIRE(c.entries.size() == 2);
  CHECK(c.entries[0].id == "p1");
  CHECK(c.entries[0].error.empty());
  CHECK(c.entries[0].gold_label == "yes");
  CHECK(c.entries[0].gold_score == 4.0);
  CHECK(c.entries[0].line == 1);
  CHECK(print_formula(c.entries[0].formula1) == "exists e1 . run(e1)");
  CHECK(c.entries[0].annotation1.tokens.size() == 2);
  CHECK(c.entries[0].annotation2.passive);
  CHECK(c.entries[1].gold_label == "unknown");
  CHECK(c.entries[1].line == 2);
  CHECK(c.score_lo == 0.0);
  CHECK(c.score_hi == 5.0);
}

TEST_CASE("corpus_meta declares the score range") {
  std::istringstream in(
      "{\"corpus_meta\":{\"score_range\":[1,5]}}\n" +
      entry_line("low", "exists e1 . run(e1)", "exists e1 . run(e1)", 0.5));
  Corpus c = corpus_from_jsonl(in);
  CHECK(c.score_lo == 1.0);
  CHECK(c.score_hi == 5.0);
  REQUIRE(c.entries.size() == 1);
  CHECK(c.entries[0].error.find("outside declared range") != std::string::npos);
}

TEST_CASE("malformed entries are recorded, not thrown") {
  std::istringstream in(
      entry_line("bad-formula", "exists e1 . run(e1", "exists e1 . run(e1)",
                 3.0) +
      "\n"
      "not json at all\n" +
      entry_line("bad-label", "exists e1 . run(e1)", "exists e1 . run(e1)",
                 3.0, "maybe") +
      "\n" +
      entry_line("fine", "exists e1 . run(e1)", "exists e1 . run(e1)", 3.0));
  Corpus c = corpus_from_jsonl(in);
  REQUIRE(c.entries.size() == 4);
  CHECK(c.entries[0].error.find("formula1 at 1:19") != std::string::npos);
  CHECK(c.entries[0].formula1 == nullptr);
  CHECK(c.entries[1].id == "line-2");
  CHECK(c.entries[1].error.find("bad JSON") != std::string::npos);
  CHECK(c.entries[2].error.find("gold_label") != std::string::npos);
  CHECK(c.entries[3].error.empty());
  CHECK(c.entries[3].formula2 != nullptr);
}

TEST_CASE("pair formulas share one signature") {
  // man() is used with an Entity in formula1 and an Event in formula2.
  std::istringstream in(entry_line("clash", "exists x1 . man(x1)",
                                   "exists e1 . man(e1)", 3.0));
  Corpus c = corpus_from_jsonl(in);
  REQUIRE(c.entries.size() == 1);
  CHECK(c.entries[0].error.find("formula2") != std::string::npos);
}

TEST_CASE("duplicate ids are a file-level error") {
  std::istringstream in(
      entry_line("dup", "exists e1 . run(e1)", "exists e1 . run(e1)", 3.0) +
      "\n" +
      entry_line("dup", "exists e1 . run(e1)", "exists e1 . run(e1)", 3.0));
  CHECK_THROWS_AS(corpus_from_jsonl(in), CorpusError);
}

TEST_CASE("ids are restricted to csv-safe characters") {
  std::istringstream in(entry_line("has,comma", "exists e1 . run(e1)",
                                   "exists e1 . run(e1)", 3.0));
  Corpus c = corpus_from_jsonl(in);
  REQUIRE(c.entries.size() == 1);
  CHECK(!c.entries[0].error.empty());
}

TEST_CASE("config round-trips through json") {
  RunConfig cfg;
  cfg.step_budget = 500;
  cfg.require_same_case = true;
  cfg.disconnected_probability = 0.25;
  cfg.grid.push_back({50, 4, 2, 3, false});
  cfg.k_folds = 5;
  cfg.seed = 123456789012345ULL;
  cfg.split = "first:10";
  cfg.oracle_bound = 2;
  RunConfig back = config_from_json(config_to_json(cfg));
  CHECK(back == cfg);
  CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("config defaults apply to missing fields") {
  RunConfig cfg = config_from_json("{\"seed\":9}");
  CHECK(cfg.seed == 9);
  CHECK(cfg.step_budget == 10000);
  CHECK(cfg.grid.empty());
  CHECK(cfg.split == "all");
  CHECK(config_from_json("{}") == RunConfig{});
}

TEST_CASE("bad configs throw") {
  CHECK_THROWS_AS(config_from_json("not json"), CorpusError);
  CHECK_THROWS_AS(config_from_json("{\"step_budget\":0}"), CorpusError);
  CHECK_THROWS_AS(config_from_json("{\"k_folds\":0}"), CorpusError);
  CHECK_THROWS_AS(config_from_json("{\"split\":\"odd\"}"), CorpusError);
  CHECK_THROWS_AS(config_from_json("{\"split\":\"first:x\"}"), CorpusError);
}

TEST_CASE("split_rows selects prefixes and suffixes") {
  CHECK(split_rows("all", 4) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(split_rows("first:2", 4) == std::vector<std::size_t>{0, 1});
  CHECK(split_rows("first:9", 4) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(split_rows("after:2", 4) == std::vector<std::size_t>{2, 3});
  CHECK(split_rows("after:9", 4).empty());
  CHECK(split_rows("all", 0).empty());
  CHECK_THROWS_AS(split_rows("half", 4), CorpusError);
}
