#include "doctest.h"
#include "ndsts/oracle.hpp"

using namespace ndsts;

namespace {

const char* kA =
    "exists e1 x1 x2 . man(x1) & sing(e1) & subj(e1) = x1 & bar(x2) & "
    "in(e1, x2)";
const char* kB = "exists e1 x1 . man(x1) & sing(e1) & subj(e1) = x1";

ModelSignature one_noun_sig() {
  ModelSignature sig;
  sig.predicates = {{"man", {Sort::Entity}}};
  return sig;
}

}  // namespace

TEST_CASE("model counts match closed forms") {
  ModelSignature sig = one_noun_sig();
  CHECK(count_models(sig, 1, 0) == 2);
  CHECK(count_models(sig, 2, 0) == 4);
  CHECK(count_models(sig, 0, 0) == 1);

  sig.predicates.push_back({"sing", {Sort::Event}});
  sig.roles = {Role::Subj};
  // man: 2^2, sing: 2^1, subj: 2 choices for the single event.
  CHECK(count_models(sig, 2, 1) == 16);
  // A role function needs a nonempty entity codomain.
  CHECK(count_models(sig, 0, 1) == 0);

  sig.entity_constants = {"c"};
  CHECK(count_models(sig, 0, 0) == 0);
  CHECK(count_models(sig, 2, 0) == 8);  // 2 (c) * 4 (man) * 1 * 1

  sig.event_constants = {"ev"};
  CHECK(count_models(sig, 2, 0) == 0);
  CHECK(count_models(sig, 2, 1) == 32);  // 2 (c) * 1 (ev) * 4 (man) * 2 (sing) * 2 (subj)
}

TEST_CASE("enumeration visits exactly the counted models") {
  ModelSignature sig;
  sig.predicates = {{"man", {Sort::Entity}}, {"sing", {Sort::Event}}};
  sig.roles = {Role::Subj};
  int seen = 0;
  for_each_model(sig, 2, 1, [&](const FiniteModel& m) {
    CHECK(m.role_interp.at(Role::Subj).size() == 1);
    CHECK(m.pred_interp.count("man"));
    ++seen;
    return true;
  });
  CHECK(seen == 16);
}

TEST_CASE("satisfies on hand-built models") {
  FiniteModel m;
  m.n_entity = 1;
  m.pred_interp["man"].insert({0});
  CHECK(satisfies(m, parse_formula("exists x1 . man(x1)")));
  CHECK(satisfies(m, parse_formula("~False")));
  CHECK(!satisfies(m, parse_formula("False")));

  FiniteModel empty;
  CHECK(satisfies(empty, parse_formula("~False")));

  CHECK_THROWS_AS(satisfies(m, parse_formula("exists x1 . dog(x1)")),
                  OracleError);
}

TEST_CASE("satisfies matches truth tables on quantifier-free inputs") {
  Signature sig;
  sig.constants["c"] = Sort::Entity;
  sig.constants["d"] = Sort::Entity;
  for (int pa = 0; pa < 2; ++pa)
    for (int qa = 0; qa < 2; ++qa)
      for (int same = 0; same < 2; ++same) {
        FiniteModel m;
        m.n_entity = 2;
        m.constants["c"] = 0;
        m.constants["d"] = same ? 0 : 1;
        m.pred_interp["p"];
        m.pred_interp["q"];
        if (pa) m.pred_interp["p"].insert({0});
        if (qa) m.pred_interp["q"].insert({0});
        auto holds = [&](const char* text) {
          return satisfies(m, parse_formula(text, sig));
        };
        CHECK(holds("p(c) & q(c)") == (pa && qa));
        CHECK(holds("p(c) -> q(c)") == (!pa || qa));
        CHECK(holds("~p(c)") == !pa);
        CHECK(holds("c = d") == static_cast<bool>(same));
        CHECK(holds("p(c) & ~q(c) -> False") == !(pa && !qa));
      }
}

TEST_CASE("bounded entailment on the singing-man pair") {
  FormulaPtr a = parse_formula(kA);
  FormulaPtr b = parse_formula(kB);
  CHECK(entails_bounded(a, b, 3));
  CHECK(entails_bounded(a, a, 3));
  CHECK(entails_bounded(b, b, 3));
  CHECK(!entails_bounded(b, a, 3));

  auto counter = find_countermodel(b, a, 3);
  REQUIRE(counter.has_value());
  CHECK(satisfies(*counter, b));
  CHECK(!satisfies(*counter, a));
  // The first countermodel in enumeration order has no bar at all.
  CHECK(!satisfies(*counter, parse_formula("exists x1 . bar(x1)")));
}

TEST_CASE("joint satisfiability detects the contradiction pair") {
  FormulaPtr p0 =
      parse_formula("~ exists e1 x1 . man(x1) & sing(e1) & subj(e1) = x1");
  FormulaPtr p1 = parse_formula(
      "exists e1 x1 . man(x1) & sing(e1) & loudly(e1) & subj(e1) = x1");
  CHECK(satisfiable_bounded({p1}, 3));
  CHECK(satisfiable_bounded({p0}, 3));
  CHECK(!satisfiable_bounded({p0, p1}, 3));
}

TEST_CASE("fast path agrees with the reference evaluator") {
  FormulaPtr a =
      parse_formula("exists e1 x1 . run(e1) & subj(e1) = x1 & dog(x1)");
  FormulaPtr b = parse_formula("exists e1 . run(e1)");
  ModelSignature sig = ModelSignature::from_formulas({a, b});

  auto brute_entails = [&](const FormulaPtr& x, const FormulaPtr& y) {
    for (int de = 0; de <= 2; ++de)
      for (int dv = 0; dv <= 2; ++dv) {
        bool ok = for_each_model(sig, de, dv, [&](const FiniteModel& m) {
          return !(satisfies(m, x) && !satisfies(m, y));
        });
        if (!ok) return false;
      }
    return true;
  };
  CHECK(brute_entails(a, b) == entails_bounded(a, b, 2));
  CHECK(brute_entails(b, a) == entails_bounded(b, a, 2));
  CHECK(entails_bounded(a, b, 2));
  CHECK(!entails_bounded(b, a, 2));
}

TEST_CASE("enumeration guard rejects oversized signatures") {
  Signature sig;
  ParseOptions free_ok{.allow_free = true};
  FormulaPtr wide = parse_formula(
      "exists x1 x2 . p(x1, x2) & q(x1, x2) & r(x1, x2) & s(x1, x2)", sig,
      free_ok);
  CHECK_THROWS_AS(entails_bounded(wide, wide, 3), OracleError);
}

TEST_CASE("generated pairs are deterministic and well formed") {
  bool any_differ = false;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto [a, b] = gen_pair(seed);
    auto [a2, b2] = gen_pair(seed);
    CHECK(equal(a, a2));
    CHECK(equal(b, b2));
    CHECK(free_vars(*a).empty());
    CHECK(free_vars(*b).empty());
    Signature sig;
    FormulaPtr ra = parse_formula(print_formula(a), sig);
    FormulaPtr rb = parse_formula(print_formula(b), sig);
    CHECK(equal(ra, a));
    CHECK(equal(rb, b));
    auto [na, nb] = gen_pair(seed + 1);
    if (!equal(a, na) || !equal(b, nb)) any_differ = true;
  }
  CHECK(any_differ);
}
