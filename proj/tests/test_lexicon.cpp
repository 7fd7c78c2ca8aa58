#include <sstream>

#include "doctest.h"
#include "ndsts/lexicon.hpp"

using namespace ndsts;

TEST_CASE("relation lookup follows priority order") {
  Lexicon lex;
  lex.add_isa("man", "person");
  CHECK(lex.find_relation("man", "person") == RelationKind::Hypernym);
  CHECK(lex.find_relation("person", "man") == RelationKind::Hyponym);
  CHECK(lex.find_relation("man", "man") == RelationKind::Inflection);
  CHECK(!lex.find_relation("man", "dog").has_value());

  lex.add_relation("remove", "add", RelationKind::Antonym);
  CHECK(lex.find_relation("remove", "add") == RelationKind::Antonym);
  CHECK(lex.find_relation("add", "remove") == RelationKind::Antonym);

  // Synonym outranks hyponym when both hold.
  Lexicon both;
  both.add_isa("puppy", "dog");
  both.add_relation("dog", "puppy", RelationKind::Synonym);
  CHECK(both.find_relation("dog", "puppy") == RelationKind::Synonym);

  // Directed kinds are not symmetric as raw edges, but a hypernym edge read
  // backwards is a hyponym.
  Lexicon dir;
  dir.add_relation("cat", "feline", RelationKind::Hypernym);
  CHECK(dir.find_relation("cat", "feline") == RelationKind::Hypernym);
  CHECK(dir.find_relation("feline", "cat") == RelationKind::Hyponym);

  Lexicon infl;
  infl.add_relation("sang", "sing", RelationKind::Inflection);
  CHECK(infl.find_relation("sang", "sing") == RelationKind::Inflection);
  CHECK(!infl.find_relation("sing", "sang").has_value());
}

TEST_CASE("taxonomy rejects cycles") {
  Lexicon lex;
  lex.add_isa("dog", "canine");
  lex.add_isa("canine", "animal");
  CHECK_THROWS_AS(lex.add_isa("animal", "dog"), LexiconError);
  CHECK_THROWS_AS(lex.add_isa("dog", "dog"), LexiconError);
}

TEST_CASE("axiom probability from taxonomy path") {
  Lexicon lex;
  lex.add_isa("dog", "canine");
  lex.add_isa("canine", "animal");
  CHECK(axiom_probability("dog", "dog", lex) == doctest::Approx(1.0));
  CHECK(axiom_probability("dog", "canine", lex) == doctest::Approx(0.5));
  CHECK(axiom_probability("dog", "animal", lex) == doctest::Approx(1.0 / 3));
  // Symmetric in both arguments.
  CHECK(axiom_probability("animal", "dog", lex) ==
        axiom_probability("dog", "animal", lex));
  // Disconnected fallback, overridable.
  CHECK(axiom_probability("dog", "piano", lex) == doctest::Approx(0.1));
  LexiconConfig cfg;
  cfg.disconnected_probability = 0.2;
  CHECK(axiom_probability("dog", "piano", lex, cfg) == doctest::Approx(0.2));

  lex.add_relation("dog", "hound", RelationKind::Synonym);
  CHECK(axiom_probability("dog", "hound", lex) == doctest::Approx(1.0));
  lex.add_relation("strum", "play", RelationKind::Similarity);
  CHECK(axiom_probability("strum", "play", lex) == doctest::Approx(0.1));

  // Non-increasing along a chain.
  CHECK(axiom_probability("dog", "animal", lex) <=
        axiom_probability("dog", "canine", lex));
}

TEST_CASE("axiom generation needs a shared concrete argument") {
  Lexicon lex;
  lex.add_isa("man", "person");
  Signature sig;
  ParseOptions free_ok{.allow_free = true};
  auto atom = [&](const char* text) { return parse_formula(text, sig, free_ok); };

  std::vector<FormulaPtr> pool = {atom("man(x1)"), atom("sing(e1)")};
  std::vector<FormulaPtr> goals = {atom("person(x1)")};
  std::vector<Axiom> axs = generate_axioms(pool, goals, lex);
  REQUIRE(axs.size() == 1);
  CHECK(axs[0].source == "man");
  CHECK(axs[0].target == "person");
  CHECK(axs[0].relation == RelationKind::Hypernym);
  CHECK(!axs[0].negated);
  CHECK(axs[0].probability == doctest::Approx(0.5));
  CHECK(print_formula(axs[0].formula()) == "forall x1 . man(x1) -> person(x1)");

  // Different argument: no shared term, no axiom.
  CHECK(generate_axioms(pool, {atom("person(x2)")}, lex).empty());
  // Empty KB: no axiom even with a shared argument.
  CHECK(generate_axioms(pool, goals, Lexicon{}).empty());
  // Duplicate candidates collapse.
  std::vector<FormulaPtr> pool2 = {atom("man(x1)"), atom("man(x1)")};
  CHECK(generate_axioms(pool2, goals, lex).size() == 1);
}

TEST_CASE("antonym axioms are negated") {
  Lexicon lex;
  lex.add_relation("remove", "add", RelationKind::Antonym);
  Signature sig;
  ParseOptions free_ok{.allow_free = true};
  std::vector<FormulaPtr> pool = {parse_formula("remove(e1)", sig, free_ok)};
  std::vector<FormulaPtr> goals = {parse_formula("add(e1)", sig, free_ok)};
  std::vector<Axiom> axs = generate_axioms(pool, goals, lex);
  REQUIRE(axs.size() == 1);
  CHECK(axs[0].negated);
  CHECK(axs[0].var_sort == Sort::Event);
  CHECK(print_formula(axs[0].formula()) ==
        "forall e1 . remove(e1) -> ~add(e1)");
}

TEST_CASE("KB loads from JSON lines") {
  std::istringstream in(R"({"type":"isa","child":"man","parent":"person"}
{"type":"rel","a":"remove","b":"add","rel":"antonym"}

{"type":"syn","lemma":"man","synonyms":["male","fellow"]}
)");
  Lexicon lex = lexicon_from_jsonl(in);
  CHECK(lex.find_relation("man", "person") == RelationKind::Hypernym);
  CHECK(lex.find_relation("remove", "add") == RelationKind::Antonym);
  CHECK(lex.synonyms_of("man").count("male") == 1);
  CHECK(lex.synonyms_of("dog").empty());
  CHECK(lex.taxonomy_edge_count() == 1);
  CHECK(lex.relation_edge_count() == 1);

  std::istringstream bad1("{\"type\":\"rel\",\"a\":\"x\",\"b\":\"y\"}");
  CHECK_THROWS_AS(lexicon_from_jsonl(bad1), LexiconError);
  std::istringstream bad2("{\"type\":\"rel\",\"a\":\"x\",\"b\":\"y\",\"rel\":\"sibling\"}");
  CHECK_THROWS_AS(lexicon_from_jsonl(bad2), LexiconError);
  std::istringstream bad3("not json");
  CHECK_THROWS_AS(lexicon_from_jsonl(bad3), LexiconError);
}
