#include "ndsts/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include "ndsts/rng.hpp"

namespace ndsts {

namespace {

int role_index(Role r) { return static_cast<int>(r); }

// ---------------------------------------------------------------------------
// Compact models: domains are 0..n-1, predicate extensions are bitmasks over
// row-major tuple indices. Used for bulk enumeration; the public FiniteModel
// is converted at the API boundary.
// ---------------------------------------------------------------------------

struct Tables {
  std::map<std::string, int> const_idx;
  std::vector<Sort> const_sort;
  std::map<std::string, int> pred_idx;
  std::vector<std::vector<Sort>> pred_sorts;
  std::array<bool, 3> role_used{};
};

Tables make_tables(const ModelSignature& sig) {
  Tables t;
  for (const std::string& c : sig.entity_constants) {
    t.const_idx.emplace(c, static_cast<int>(t.const_sort.size()));
    t.const_sort.push_back(Sort::Entity);
  }
  for (const std::string& c : sig.event_constants) {
    t.const_idx.emplace(c, static_cast<int>(t.const_sort.size()));
    t.const_sort.push_back(Sort::Event);
  }
  for (const auto& [name, sorts] : sig.predicates) {
    t.pred_idx.emplace(name, static_cast<int>(t.pred_sorts.size()));
    t.pred_sorts.push_back(sorts);
  }
  for (Role r : sig.roles) t.role_used[role_index(r)] = true;
  return t;
}

struct Compact {
  int dE = 0, dV = 0;
  std::vector<int> const_val;
  std::array<std::vector<int>, 3> role_fn;
  std::vector<std::uint64_t> pred_bits;

  int dom(Sort s) const { return s == Sort::Entity ? dE : dV; }
};

struct CTerm {
  enum class K { Var, Const, Role };
  K k = K::Var;
  int idx = -1;
  int role = -1;
  std::unique_ptr<CTerm> arg;
  Sort sort = Sort::Entity;
};

struct CFormula {
  Formula::Kind kind = Formula::Kind::False;
  int pred = -1;
  std::vector<CTerm> args;  // atom arguments, or {lhs, rhs} for equalities
  std::unique_ptr<CFormula> a, b;
  int slot = -1;
  Sort qsort = Sort::Entity;
};

CTerm compile_term(const Term& t, const Tables& tab,
                   const std::map<Term, int>& slots) {
  CTerm c;
  c.sort = t.sort();
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = slots.find(t);
      if (it == slots.end())
        throw OracleError("unbound variable " + t.name());
      c.k = CTerm::K::Var;
      c.idx = it->second;
      return c;
    }
    case Term::Kind::Const: {
      auto it = tab.const_idx.find(t.name());
      if (it == tab.const_idx.end())
        throw OracleError("uninterpreted constant " + t.name());
      c.k = CTerm::K::Const;
      c.idx = it->second;
      return c;
    }
    case Term::Kind::Meta:
      throw OracleError("metavariable " + t.name() +
                        " in a formula given to the model checker");
    case Term::Kind::RoleApp: {
      if (!tab.role_used[role_index(t.role())])
        throw OracleError(std::string("uninterpreted role ") +
                          role_name(t.role()));
      c.k = CTerm::K::Role;
      c.role = role_index(t.role());
      c.arg = std::make_unique<CTerm>(compile_term(t.arg(), tab, slots));
      return c;
    }
  }
  return c;
}

std::unique_ptr<CFormula> compile(const Formula& f, const Tables& tab,
                                  std::map<Term, int>& slots, int& max_slots) {
  auto c = std::make_unique<CFormula>();
  c->kind = f.kind;
  switch (f.kind) {
    case Formula::Kind::False:
      return c;
    case Formula::Kind::Atom: {
      auto it = tab.pred_idx.find(f.pred);
      if (it == tab.pred_idx.end())
        throw OracleError("uninterpreted predicate " + f.pred);
      c->pred = it->second;
      for (const Term& t : f.args) c->args.push_back(compile_term(t, tab, slots));
      return c;
    }
    case Formula::Kind::Eq:
      c->args.push_back(compile_term(f.lhs, tab, slots));
      c->args.push_back(compile_term(f.rhs, tab, slots));
      return c;
    case Formula::Kind::Not:
      c->a = compile(*f.child, tab, slots, max_slots);
      return c;
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      c->a = compile(*f.left, tab, slots, max_slots);
      c->b = compile(*f.right, tab, slots, max_slots);
      return c;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      int slot = max_slots++;
      auto prev = slots.find(f.var);
      std::optional<int> saved;
      if (prev != slots.end()) saved = prev->second;
      slots[f.var] = slot;
      c->slot = slot;
      c->qsort = f.var.sort();
      c->a = compile(*f.body, tab, slots, max_slots);
      if (saved) slots[f.var] = *saved;
      else slots.erase(f.var);
      return c;
    }
  }
  return c;
}

int eval_term(const CTerm& t, const Compact& m, const std::vector<int>& env) {
  switch (t.k) {
    case CTerm::K::Var: return env[t.idx];
    case CTerm::K::Const: return m.const_val[t.idx];
    case CTerm::K::Role: return m.role_fn[t.role][eval_term(*t.arg, m, env)];
  }
  return 0;
}

bool eval(const CFormula& f, const Compact& m, std::vector<int>& env) {
  switch (f.kind) {
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Atom: {
      std::uint64_t idx = 0;
      for (const CTerm& t : f.args)
        idx = idx * static_cast<std::uint64_t>(m.dom(t.sort)) +
              static_cast<std::uint64_t>(eval_term(t, m, env));
      return (m.pred_bits[f.pred] >> idx) & 1;
    }
    case Formula::Kind::Eq:
      return eval_term(f.args[0], m, env) == eval_term(f.args[1], m, env);
    case Formula::Kind::Not:
      return !eval(*f.a, m, env);
    case Formula::Kind::And:
      return eval(*f.a, m, env) && eval(*f.b, m, env);
    case Formula::Kind::Imp:
      return !eval(*f.a, m, env) || eval(*f.b, m, env);
    case Formula::Kind::Exists: {
      int d = m.dom(f.qsort);
      for (int v = 0; v < d; ++v) {
        env[f.slot] = v;
        if (eval(*f.a, m, env)) return true;
      }
      return false;
    }
    case Formula::Kind::Forall: {
      int d = m.dom(f.qsort);
      for (int v = 0; v < d; ++v) {
        env[f.slot] = v;
        if (!eval(*f.a, m, env)) return false;
      }
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

struct IntSlot {
  int* target;
  int radix;
};
struct BitsSlot {
  std::uint64_t* target;
  std::uint64_t count;  // 2^tuples
};

struct Enumeration {
  Compact m;
  std::vector<IntSlot> int_slots;
  std::vector<BitsSlot> bits_slots;
  bool valid = false;
};

std::uint64_t tuple_count(const std::vector<Sort>& sorts, const Compact& m) {
  std::uint64_t n = 1;
  for (Sort s : sorts) n *= static_cast<std::uint64_t>(m.dom(s));
  return n;
}

// Prepares the slot lists for one (n_entity, n_event) size combination.
// Returns an Enumeration with valid=false when no model of that shape exists.
Enumeration prepare(const ModelSignature& sig, const Tables& tab, int n_entity,
                    int n_event, double max_log2_models) {
  Enumeration e;
  e.m.dE = n_entity;
  e.m.dV = n_event;
  if (n_entity == 0 && !sig.entity_constants.empty()) return e;
  if (n_event == 0 && !sig.event_constants.empty()) return e;
  if (n_entity == 0 && n_event > 0 && !sig.roles.empty()) return e;

  e.m.const_val.assign(tab.const_sort.size(), 0);
  for (int r = 0; r < 3; ++r)
    if (tab.role_used[r]) e.m.role_fn[r].assign(n_event, 0);
  e.m.pred_bits.assign(tab.pred_sorts.size(), 0);

  double bits = 0;
  for (std::size_t i = 0; i < tab.const_sort.size(); ++i) {
    int d = e.m.dom(tab.const_sort[i]);
    e.int_slots.push_back({&e.m.const_val[i], d});
    bits += std::log2(static_cast<double>(d));
  }
  for (int r = 0; r < 3; ++r)
    if (tab.role_used[r])
      for (int ev = 0; ev < n_event; ++ev) {
        e.int_slots.push_back({&e.m.role_fn[r][ev], n_entity});
        bits += std::log2(static_cast<double>(n_entity));
      }
  for (std::size_t p = 0; p < tab.pred_sorts.size(); ++p) {
    std::uint64_t tuples = tuple_count(tab.pred_sorts[p], e.m);
    if (tuples > 62) throw OracleError("predicate extension too large");
    e.bits_slots.push_back({&e.m.pred_bits[p], std::uint64_t{1} << tuples});
    bits += static_cast<double>(tuples);
  }
  if (bits > max_log2_models)
    throw OracleError("model space too large to enumerate (about 2^" +
                      std::to_string(static_cast<int>(bits)) + " models)");
  e.valid = true;
  return e;
}

constexpr double kMaxLog2Models = 25.0;

template <class Leaf>
bool enum_ints(Enumeration& e, std::size_t i, Leaf&& leaf);

template <class Leaf>
bool enum_bits(Enumeration& e, std::size_t i, Leaf&& leaf) {
  if (i == e.bits_slots.size()) return leaf(e.m);
  BitsSlot& s = e.bits_slots[i];
  for (std::uint64_t v = 0; v < s.count; ++v) {
    *s.target = v;
    if (!enum_bits(e, i + 1, leaf)) return false;
  }
  return true;
}

template <class Leaf>
bool enum_ints(Enumeration& e, std::size_t i, Leaf&& leaf) {
  if (i == e.int_slots.size()) return enum_bits(e, 0, leaf);
  IntSlot& s = e.int_slots[i];
  for (int v = 0; v < s.radix; ++v) {
    *s.target = v;
    if (!enum_ints(e, i + 1, leaf)) return false;
  }
  return true;
}

// Visits every model of every valid size combination up to max_size per sort.
// Leaf returns false to stop. Returns false when stopped.
template <class Leaf>
bool scan(const ModelSignature& sig, const Tables& tab, int max_size,
          Leaf&& leaf) {
  if (max_size < 1) throw OracleError("max_size must be at least 1");
  for (int dv = 0; dv <= max_size; ++dv)
    for (int de = 0; de <= max_size; ++de) {
      Enumeration e = prepare(sig, tab, de, dv, kMaxLog2Models);
      if (!e.valid) continue;
      if (!enum_ints(e, 0, leaf)) return false;
    }
  return true;
}

FiniteModel to_finite(const Compact& m, const Tables& tab) {
  FiniteModel out;
  out.n_entity = m.dE;
  out.n_event = m.dV;
  for (const auto& [name, idx] : tab.const_idx) out.constants[name] = m.const_val[idx];
  for (int r = 0; r < 3; ++r)
    if (tab.role_used[r])
      out.role_interp[static_cast<Role>(r)] = m.role_fn[r];
  for (const auto& [name, idx] : tab.pred_idx) {
    std::set<std::vector<int>>& ext = out.pred_interp[name];
    const std::vector<Sort>& sorts = tab.pred_sorts[idx];
    std::uint64_t tuples = tuple_count(sorts, m);
    for (std::uint64_t t = 0; t < tuples; ++t) {
      if (!((m.pred_bits[idx] >> t) & 1)) continue;
      // Decode the row-major index back into a tuple.
      std::vector<int> tuple(sorts.size());
      std::uint64_t rest = t;
      for (std::size_t k = sorts.size(); k-- > 0;) {
        std::uint64_t d = static_cast<std::uint64_t>(m.dom(sorts[k]));
        tuple[k] = static_cast<int>(rest % d);
        rest /= d;
      }
      ext.insert(std::move(tuple));
    }
  }
  return out;
}

void collect_signature(const Term& t, ModelSignature& sig,
                       std::map<std::string, Sort>& consts) {
  switch (t.kind()) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Const: {
      auto [it, inserted] = consts.emplace(t.name(), t.sort());
      if (!inserted && it->second != t.sort())
        throw OracleError("constant " + t.name() + " used with two sorts");
      return;
    }
    case Term::Kind::Meta:
      throw OracleError("metavariable " + t.name() +
                        " in a formula given to the model checker");
    case Term::Kind::RoleApp:
      if (std::find(sig.roles.begin(), sig.roles.end(), t.role()) ==
          sig.roles.end())
        sig.roles.push_back(t.role());
      collect_signature(t.arg(), sig, consts);
      return;
  }
}

void collect_signature(const Formula& f, ModelSignature& sig,
                       std::map<std::string, Sort>& consts,
                       std::map<std::string, std::vector<Sort>>& preds) {
  switch (f.kind) {
    case Formula::Kind::False:
      return;
    case Formula::Kind::Atom: {
      std::vector<Sort> sorts;
      for (const Term& t : f.args) {
        sorts.push_back(t.sort());
        collect_signature(t, sig, consts);
      }
      auto [it, inserted] = preds.emplace(f.pred, sorts);
      if (!inserted && it->second != sorts)
        throw OracleError("predicate " + f.pred + " used with two signatures");
      return;
    }
    case Formula::Kind::Eq:
      collect_signature(f.lhs, sig, consts);
      collect_signature(f.rhs, sig, consts);
      return;
    case Formula::Kind::Not:
      collect_signature(*f.child, sig, consts, preds);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      collect_signature(*f.left, sig, consts, preds);
      collect_signature(*f.right, sig, consts, preds);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      collect_signature(*f.body, sig, consts, preds);
      return;
  }
}

}  // namespace

ModelSignature ModelSignature::from_formulas(const std::vector<FormulaPtr>& fs) {
  ModelSignature sig;
  std::map<std::string, Sort> consts;
  std::map<std::string, std::vector<Sort>> preds;
  for (const FormulaPtr& f : fs) collect_signature(*f, sig, consts, preds);
  for (const auto& [name, sort] : consts)
    (sort == Sort::Entity ? sig.entity_constants : sig.event_constants)
        .push_back(name);
  for (auto& [name, sorts] : preds) sig.predicates.emplace_back(name, sorts);
  std::sort(sig.roles.begin(), sig.roles.end());
  return sig;
}

// ---------------------------------------------------------------------------
// Reference evaluator over the public FiniteModel.
// ---------------------------------------------------------------------------

namespace {

int eval_term_ref(const FiniteModel& m, const Term& t,
                  const std::map<Term, int>& env) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = env.find(t);
      if (it == env.end()) throw OracleError("unbound variable " + t.name());
      return it->second;
    }
    case Term::Kind::Const: {
      auto it = m.constants.find(t.name());
      if (it == m.constants.end())
        throw OracleError("uninterpreted constant " + t.name());
      return it->second;
    }
    case Term::Kind::Meta:
      throw OracleError("metavariable " + t.name() +
                        " in a formula given to the model checker");
    case Term::Kind::RoleApp: {
      auto it = m.role_interp.find(t.role());
      if (it == m.role_interp.end())
        throw OracleError(std::string("uninterpreted role ") +
                          role_name(t.role()));
      int ev = eval_term_ref(m, t.arg(), env);
      return it->second.at(static_cast<std::size_t>(ev));
    }
  }
  return 0;
}

bool sat_ref(const FiniteModel& m, const Formula& f, std::map<Term, int>& env) {
  switch (f.kind) {
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Atom: {
      auto it = m.pred_interp.find(f.pred);
      if (it == m.pred_interp.end())
        throw OracleError("uninterpreted predicate " + f.pred);
      std::vector<int> tuple;
      for (const Term& t : f.args) tuple.push_back(eval_term_ref(m, t, env));
      return it->second.count(tuple) > 0;
    }
    case Formula::Kind::Eq:
      return eval_term_ref(m, f.lhs, env) == eval_term_ref(m, f.rhs, env);
    case Formula::Kind::Not:
      return !sat_ref(m, *f.child, env);
    case Formula::Kind::And:
      return sat_ref(m, *f.left, env) && sat_ref(m, *f.right, env);
    case Formula::Kind::Imp:
      return !sat_ref(m, *f.left, env) || sat_ref(m, *f.right, env);
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      int d = f.var.sort() == Sort::Entity ? m.n_entity : m.n_event;
      auto saved = env.find(f.var) != env.end() ? std::optional<int>(env[f.var])
                                                : std::nullopt;
      bool result = f.kind == Formula::Kind::Forall;
      for (int v = 0; v < d; ++v) {
        env[f.var] = v;
        bool s = sat_ref(m, *f.body, env);
        if (f.kind == Formula::Kind::Exists && s) {
          result = true;
          break;
        }
        if (f.kind == Formula::Kind::Forall && !s) {
          result = false;
          break;
        }
      }
      if (saved) env[f.var] = *saved;
      else env.erase(f.var);
      return result;
    }
  }
  return false;
}

}  // namespace

bool satisfies(const FiniteModel& m, const Formula& f) {
  std::map<Term, int> env;
  return sat_ref(m, f, env);
}

bool satisfies(const FiniteModel& m, const FormulaPtr& f) {
  return satisfies(m, *f);
}

std::uint64_t count_models(const ModelSignature& sig, int n_entity,
                           int n_event) {
  Tables tab = make_tables(sig);
  Enumeration e = prepare(sig, tab, n_entity, n_event, 62.0);
  if (!e.valid) return 0;
  long double total = 1;
  std::uint64_t count = 1;
  for (const IntSlot& s : e.int_slots) {
    total *= s.radix;
    count *= static_cast<std::uint64_t>(s.radix);
  }
  for (const BitsSlot& s : e.bits_slots) {
    total *= static_cast<long double>(s.count);
    count *= s.count;
  }
  if (total > 1e18) throw OracleError("model count overflows");
  return count;
}

bool for_each_model(const ModelSignature& sig, int n_entity, int n_event,
                    const std::function<bool(const FiniteModel&)>& visit) {
  Tables tab = make_tables(sig);
  Enumeration e = prepare(sig, tab, n_entity, n_event, kMaxLog2Models);
  if (!e.valid) return true;
  return enum_ints(e, 0, [&](const Compact& m) { return visit(to_finite(m, tab)); });
}

namespace {

struct CheckSetup {
  ModelSignature sig;
  Tables tab;
  std::vector<std::unique_ptr<CFormula>> compiled;
  std::vector<int> env;

  explicit CheckSetup(const std::vector<FormulaPtr>& fs) {
    sig = ModelSignature::from_formulas(fs);
    tab = make_tables(sig);
    int max_slots = 0;
    for (const FormulaPtr& f : fs) {
      std::map<Term, int> slots;
      compiled.push_back(compile(*f, tab, slots, max_slots));
    }
    env.assign(static_cast<std::size_t>(std::max(max_slots, 1)), 0);
  }
};

}  // namespace

bool entails_bounded(const FormulaPtr& a, const FormulaPtr& b, int max_size) {
  CheckSetup s({a, b});
  return scan(s.sig, s.tab, max_size, [&](const Compact& m) {
    return !(eval(*s.compiled[0], m, s.env) && !eval(*s.compiled[1], m, s.env));
  });
}

std::optional<FiniteModel> find_countermodel(const FormulaPtr& a,
                                             const FormulaPtr& b,
                                             int max_size) {
  CheckSetup s({a, b});
  std::optional<FiniteModel> out;
  scan(s.sig, s.tab, max_size, [&](const Compact& m) {
    if (eval(*s.compiled[0], m, s.env) && !eval(*s.compiled[1], m, s.env)) {
      out = to_finite(m, s.tab);
      return false;
    }
    return true;
  });
  return out;
}

bool satisfiable_bounded(const std::vector<FormulaPtr>& fs, int max_size) {
  CheckSetup s(fs);
  return !scan(s.sig, s.tab, max_size, [&](const Compact& m) {
    for (const auto& cf : s.compiled)
      if (!eval(*cf, m, s.env)) return true;
    return false;  // all satisfied; stop the scan
  });
}

// ---------------------------------------------------------------------------
// Random sentence pairs
// ---------------------------------------------------------------------------

namespace {

FormulaPtr assemble_sentence(const std::vector<FormulaPtr>& conjs,
                             const std::vector<Term>& var_order) {
  FormulaPtr body = conjs.back();
  for (std::size_t i = conjs.size() - 1; i-- > 0;) body = mk_and(conjs[i], body);
  std::set<Term> used;
  for (const FormulaPtr& c : conjs)
    for (const Term& v : free_vars(*c)) used.insert(v);
  FormulaPtr out = body;
  for (std::size_t i = var_order.size(); i-- > 0;)
    if (used.count(var_order[i])) out = mk_exists(var_order[i], out);
  return out;
}

}  // namespace

std::pair<FormulaPtr, FormulaPtr> gen_pair(std::uint64_t seed,
                                           const GenParams& p) {
  static const std::vector<std::string> kVerbs = {"sing", "run",   "jump",
                                                  "walk", "sleep", "fall"};
  static const std::vector<std::string> kNouns = {"man",  "dog", "bird",
                                                  "tree", "bar", "car"};
  Rng rng(seed);

  std::vector<std::string> verbs = kVerbs, nouns = kNouns;
  rng.shuffle(verbs);
  rng.shuffle(nouns);
  verbs.resize(static_cast<std::size_t>(p.verb_pool));
  nouns.resize(static_cast<std::size_t>(p.noun_pool));
  std::vector<Role> roles = {Role::Subj};
  if (rng.chance(0.4)) roles.push_back(Role::Obj);

  auto make_sentence = [&](std::vector<FormulaPtr>& conjs,
                           std::vector<Term>& vars) {
    int n_events = 1 + rng.below(p.max_events);
    int n_entities = rng.below(p.max_entities + 1);
    std::vector<Term> events, entities;
    for (int i = 0; i < n_events; ++i)
      events.push_back(Term::var("e" + std::to_string(i + 1), Sort::Event));
    for (int i = 0; i < n_entities; ++i)
      entities.push_back(Term::var("x" + std::to_string(i + 1), Sort::Entity));

    for (const Term& e : events) conjs.push_back(mk_atom(rng.pick(verbs), {e}));
    for (const Term& x : entities)
      conjs.push_back(mk_atom(rng.pick(nouns), {x}));
    for (const Term& e : events)
      if (!entities.empty() && rng.chance(0.75))
        conjs.push_back(mk_eq(Term::role_app(rng.pick(roles), e),
                              rng.pick(entities)));
    if (!entities.empty() && rng.chance(0.35))
      conjs.push_back(mk_atom(rng.pick(nouns), {rng.pick(entities)}));
    if (static_cast<int>(conjs.size()) > p.max_conjuncts)
      conjs.resize(static_cast<std::size_t>(p.max_conjuncts));

    vars = events;
    vars.insert(vars.end(), entities.begin(), entities.end());
  };

  std::vector<FormulaPtr> prem_conjs;
  std::vector<Term> prem_vars;
  make_sentence(prem_conjs, prem_vars);
  FormulaPtr premise = assemble_sentence(prem_conjs, prem_vars);

  FormulaPtr goal;
  if (rng.chance(p.share_prob)) {
    std::vector<FormulaPtr> kept;
    for (const FormulaPtr& c : prem_conjs)
      if (rng.chance(0.6)) kept.push_back(c);
    if (kept.empty()) kept.push_back(prem_conjs[rng.index(prem_conjs.size())]);
    if (rng.chance(0.3)) {
      const Term& v = prem_vars[rng.index(prem_vars.size())];
      kept.push_back(mk_atom(
          v.sort() == Sort::Event ? rng.pick(verbs) : rng.pick(nouns), {v}));
    }
    goal = assemble_sentence(kept, prem_vars);
  } else {
    std::vector<FormulaPtr> goal_conjs;
    std::vector<Term> goal_vars;
    make_sentence(goal_conjs, goal_vars);
    goal = assemble_sentence(goal_conjs, goal_vars);
  }

  if (rng.chance(p.negate_prob)) {
    if (rng.chance(0.5)) premise = mk_not(premise);
    else goal = mk_not(goal);
  }
  return {alpha_rename(premise), alpha_rename(goal)};
}

}  // namespace ndsts
