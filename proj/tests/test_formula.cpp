#include "doctest.h"
#include "ndsts/formula.hpp"

using namespace ndsts;

namespace {
const char* kSing =
    "exists e1 x1 x2 . man(x1) & sing(e1) & subj(e1) = x1 & bar(x2) & "
    "in(e1, x2)";
}

TEST_CASE("parse and print round trip") {
  FormulaPtr f = parse_formula(kSing);
  CHECK(print_formula(f) == kSing);
  CHECK(f->kind == Formula::Kind::Exists);
  CHECK(f->var == Term::var("e1", Sort::Event));

  FormulaPtr again = parse_formula(print_formula(f));
  CHECK(equal(f, again));
}

TEST_CASE("parse False and negated existential") {
  CHECK(parse_formula("False")->kind == Formula::Kind::False);

  const char* p0 = "~ exists e1 x1 . man(x1) & sing(e1) & subj(e1) = x1";
  FormulaPtr f = parse_formula(p0);
  CHECK(f->kind == Formula::Kind::Not);
  CHECK(f->child->kind == Formula::Kind::Exists);
  CHECK(print_formula(f) == p0);
}

TEST_CASE("operator precedence and associativity") {
  Signature sig;
  ParseOptions free_ok{.allow_free = true};

  FormulaPtr f = parse_formula("man(x1) & sing(e1) -> tall(x1)", sig, free_ok);
  REQUIRE(f->kind == Formula::Kind::Imp);
  CHECK(f->left->kind == Formula::Kind::And);

  FormulaPtr g = parse_formula("man(x1) -> sing(e1) -> tall(x1)", sig, free_ok);
  REQUIRE(g->kind == Formula::Kind::Imp);
  CHECK(g->right->kind == Formula::Kind::Imp);

  FormulaPtr h = parse_formula("man(x1) & sing(e1) & tall(x1)", sig, free_ok);
  REQUIRE(h->kind == Formula::Kind::And);
  CHECK(h->right->kind == Formula::Kind::And);
  CHECK(print_formula(h) == "man(x1) & sing(e1) & tall(x1)");

  FormulaPtr left_nested =
      mk_and(mk_and(h->left, h->right->left), h->right->right);
  CHECK(print_formula(left_nested) == "(man(x1) & sing(e1)) & tall(x1)");
}

TEST_CASE("negation printing") {
  Signature sig;
  ParseOptions free_ok{.allow_free = true};
  CHECK(print_formula(parse_formula("~man(x1)", sig, free_ok)) == "~man(x1)");
  CHECK(print_formula(parse_formula("~~man(x1)", sig, free_ok)) ==
        "~~man(x1)");
  CHECK(print_formula(parse_formula("~(man(x1) & tall(x1))", sig, free_ok)) ==
        "~(man(x1) & tall(x1))");
  // Negated quantifier needs parens when it is not rightmost.
  FormulaPtr f = parse_formula(
      "~(exists x1 . man(x1)) & tall(x2)", sig, free_ok);
  CHECK(print_formula(f) == "~(exists x1 . man(x1)) & tall(x2)");
}

TEST_CASE("quantifier scope extends maximally right") {
  FormulaPtr f = parse_formula("exists e1 . run(e1) & exists x1 . subj(e1) = x1");
  REQUIRE(f->kind == Formula::Kind::Exists);
  REQUIRE(f->body->kind == Formula::Kind::And);
  CHECK(f->body->right->kind == Formula::Kind::Exists);

  FormulaPtr g = parse_formula("forall x1 . man(x1) -> exists e1 . sing(e1)");
  REQUIRE(g->kind == Formula::Kind::Forall);
  CHECK(g->body->kind == Formula::Kind::Imp);
}

TEST_CASE("free variables") {
  Signature sig;
  ParseOptions free_ok{.allow_free = true};
  FormulaPtr f = parse_formula("exists e1 . sing(e1) & subj(e1) = x7", sig,
                               free_ok);
  auto fv = free_vars(*f);
  REQUIRE(fv.size() == 1);
  CHECK(*fv.begin() == Term::var("x7", Sort::Entity));

  CHECK(free_vars(*parse_formula(kSing)).empty());
  CHECK_THROWS_AS(parse_formula("man(x1)"), FormulaError);
}

TEST_CASE("substitution avoids capture") {
  Signature sig;
  ParseOptions free_ok{.allow_free = true};
  FormulaPtr f = parse_formula("exists x1 . near(x1, x2)", sig, free_ok);
  FormulaPtr g = substitute(
      f, {{Term::var("x2", Sort::Entity), Term::var("x1", Sort::Entity)}});
  // The binder must be renamed so the substituted x1 stays free.
  REQUIRE(g->kind == Formula::Kind::Exists);
  CHECK(g->var != Term::var("x1", Sort::Entity));
  auto fv = free_vars(*g);
  REQUIRE(fv.size() == 1);
  CHECK(*fv.begin() == Term::var("x1", Sort::Entity));
}

TEST_CASE("substitution rewrites inside role applications") {
  Signature sig;
  ParseOptions free_ok{.allow_free = true};
  FormulaPtr f = parse_formula("subj(e1) = x1", sig, free_ok);
  FormulaPtr g = substitute(
      f, {{Term::var("e1", Sort::Event), Term::var("e9", Sort::Event)}});
  CHECK(print_formula(g) == "subj(e9) = x1");

  CHECK_THROWS_AS(
      substitute(f, {{Term::var("x1", Sort::Entity),
                      Term::var("e2", Sort::Event)}}),
      SortError);
}

TEST_CASE("alpha renaming is canonical and idempotent") {
  Signature sig;
  FormulaPtr f = parse_formula("exists x5 e9 . man(x5) & sing(e9)", sig);
  CHECK(print_formula(f) == "exists x1 e1 . man(x1) & sing(e1)");
  CHECK(equal(alpha_rename(f), f));

  FormulaPtr a = parse_formula("exists e3 x8 . dog(x8) & bark(e3)");
  FormulaPtr b = parse_formula("exists e1 x1 . dog(x1) & bark(e1)");
  CHECK(alpha_equivalent(a, b));
  CHECK(!alpha_equivalent(a, parse_formula("exists e1 x1 . cat(x1) & bark(e1)")));
}

TEST_CASE("alpha renaming skips free names") {
  Signature sig;
  ParseOptions free_ok{.allow_free = true};
  FormulaPtr f = parse_formula("near(x1, x9) & exists x4 . far(x4, x1)", sig,
                               free_ok);
  FormulaPtr g = alpha_rename(f);
  // x1 is free, so the binder gets the next unused entity name.
  CHECK(print_formula(g) == "near(x1, x9) & exists x2 . far(x2, x1)");
}

TEST_CASE("sort checking") {
  CHECK_THROWS_AS(parse_formula("exists e1 . subj(e1) = e1"), FormulaError);
  CHECK_THROWS_AS(parse_formula("exists x1 . subj(x1) = x1"), ParseError);
  CHECK_THROWS_AS(parse_formula("exists e1 x1 . man(x1) & man(e1)"), SortError);
  CHECK_THROWS_AS(parse_formula("exists x1 x2 x3 . give(x1, x2, x3)"),
                  ParseError);

  Signature sig;
  parse_formula("exists x1 . man(x1)", sig);
  REQUIRE(sig.predicates.count("man"));
  CHECK(sig.predicates.at("man") ==
        std::vector<Sort>{Sort::Entity});
  // Later parses must respect the recorded signature.
  CHECK_THROWS_AS(parse_formula("exists e1 . man(e1)", sig), SortError);
}

TEST_CASE("constants default to Entity and can be declared as events") {
  Signature sig;
  FormulaPtr f = parse_formula("man(john)", sig);
  CHECK(f->args[0] == Term::constant("john", Sort::Entity));

  sig.constants["concert"] = Sort::Event;
  FormulaPtr g = parse_formula("exists x1 . subj(concert) = x1", sig);
  CHECK(g->body->lhs.arg() == Term::constant("concert", Sort::Event));
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_formula("exists e1 .\n  sing(e1) &");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column > 1);
  }
  CHECK_THROWS_AS(parse_formula("exists foo . man(foo)"), ParseError);
  CHECK_THROWS_AS(parse_formula("man(x1"), FormulaError);
  CHECK_THROWS_AS(parse_formula("@"), ParseError);
}

TEST_CASE("comments are skipped") {
  FormulaPtr f = parse_formula(
      "# a lonely event\nexists e1 . rain(e1) # trailing note");
  CHECK(print_formula(f) == "exists e1 . rain(e1)");
}
