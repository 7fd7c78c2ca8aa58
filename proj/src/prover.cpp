#include "ndsts/prover.hpp"

#include <algorithm>

#include "json.hpp"

namespace ndsts {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::AndIntro: return "and_intro";
    case Rule::AndElim: return "and_elim";
    case Rule::ImpIntro: return "imp_intro";
    case Rule::ImpElim: return "imp_elim";
    case Rule::ExistsIntro: return "exists_intro";
    case Rule::ExistsElim: return "exists_elim";
    case Rule::EqElim: return "eq_elim";
    case Rule::NegIntro: return "neg_intro";
    case Rule::NegElim: return "neg_elim";
    case Rule::Match: return "match";
    case Rule::Skip: return "skip";
    case Rule::AxiomUse: return "axiom";
  }
  return "?";
}

const char* status_name(ProofStatus s) {
  switch (s) {
    case ProofStatus::Proved: return "Proved";
    case ProofStatus::NegationProved: return "NegationProved";
    case ProofStatus::ProvedWithAxioms: return "ProvedWithAxioms";
    case ProofStatus::ProvedWithSkips: return "ProvedWithSkips";
    case ProofStatus::Failed: return "Failed";
  }
  return "?";
}

std::array<int, kRuleCount> ProofTrace::histogram() const {
  std::array<int, kRuleCount> h{};
  for (const RuleApplication& s : steps) ++h[static_cast<int>(s.rule)];
  return h;
}

int ProofTrace::proof_steps() const {
  int n = 0;
  for (const RuleApplication& s : steps)
    if (s.rule != Rule::Skip && s.rule != Rule::AxiomUse) ++n;
  return n;
}

std::string trace_to_jsonl(const ProofTrace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const RuleApplication& s = trace.steps[i];
    nlohmann::json j;
    j["step"] = i;
    j["rule"] = rule_name(s.rule);
    j["inputs"] = s.inputs;
    j["outputs"] = s.outputs;
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

struct BudgetExceeded {};

void append_step(ProofState& s, Rule rule, std::vector<std::string> inputs,
                 std::vector<std::string> outputs) {
  if (static_cast<int>(s.trace.steps.size()) >= s.step_budget)
    throw BudgetExceeded{};
  s.trace.steps.push_back({rule, std::move(inputs), std::move(outputs)});
}

std::string next_premise_label(ProofState& s) {
  return "P" + std::to_string(s.premise_seq++);
}

std::string next_goal_label(ProofState& s) {
  return "G" + std::to_string(s.goal_seq++);
}

void collect_constant_names(const Term& t, std::set<std::string>& out) {
  if (t.is_const()) out.insert(t.name());
  if (t.is_role_app()) collect_constant_names(t.arg(), out);
}

void collect_constant_names(const Formula& f, std::set<std::string>& out) {
  switch (f.kind) {
    case Formula::Kind::False: return;
    case Formula::Kind::Atom:
      for (const Term& t : f.args) collect_constant_names(t, out);
      return;
    case Formula::Kind::Eq:
      collect_constant_names(f.lhs, out);
      collect_constant_names(f.rhs, out);
      return;
    case Formula::Kind::Not: collect_constant_names(*f.child, out); return;
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      collect_constant_names(*f.left, out);
      collect_constant_names(*f.right, out);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      collect_constant_names(*f.body, out);
      return;
  }
}

Term fresh_skolem(ProofState& s, const Term& var) {
  std::string name = var.name();
  for (int i = 1; s.used_names.count(name); ++i)
    name = (var.sort() == Sort::Event ? "e" : "x") + std::to_string(i);
  s.used_names.insert(name);
  return Term::constant(name, var.sort());
}

bool is_atomic(const Formula& f) {
  return f.kind == Formula::Kind::Atom || f.kind == Formula::Kind::Eq ||
         f.kind == Formula::Kind::False;
}

void flatten_and(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->kind == Formula::Kind::And) {
    flatten_and(f->left, out);
    flatten_and(f->right, out);
  } else {
    out.push_back(f);
  }
}

// ---------------------------------------------------------------------------
// Unification of a goal (may contain metavariables) against a ground premise.
// ---------------------------------------------------------------------------

Term deref(Term t, const std::map<int, Term>& b) {
  while (t.is_meta()) {
    auto it = b.find(t.meta_id());
    if (it == b.end()) return t;
    t = it->second;
  }
  return t;
}

bool match_term(const Term& goal, const Term& prem, std::map<int, Term>& b) {
  Term g = deref(goal, b);
  if (g.is_meta()) {
    if (g.sort() != prem.sort()) return false;
    b.emplace(g.meta_id(), prem);
    return true;
  }
  switch (g.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return g == prem;
    case Term::Kind::RoleApp:
      return prem.is_role_app() && g.role() == prem.role() &&
             match_term(g.arg(), prem.arg(), b);
    case Term::Kind::Meta:
      return false;  // unreachable
  }
  return false;
}

bool unify(const Formula& goal, const Formula& prem, std::map<int, Term>& b) {
  if (goal.kind != prem.kind) return false;
  switch (goal.kind) {
    case Formula::Kind::False:
      return true;
    case Formula::Kind::Atom: {
      if (goal.pred != prem.pred || goal.args.size() != prem.args.size())
        return false;
      std::map<int, Term> trial = b;
      for (std::size_t i = 0; i < goal.args.size(); ++i)
        if (!match_term(goal.args[i], prem.args[i], trial)) return false;
      b = std::move(trial);
      return true;
    }
    case Formula::Kind::Eq: {
      std::map<int, Term> trial = b;
      if (match_term(goal.lhs, prem.lhs, trial) &&
          match_term(goal.rhs, prem.rhs, trial)) {
        b = std::move(trial);
        return true;
      }
      trial = b;
      if (match_term(goal.lhs, prem.rhs, trial) &&
          match_term(goal.rhs, prem.lhs, trial)) {
        b = std::move(trial);
        return true;
      }
      return false;
    }
    default:
      return false;
  }
}

Term rewrite_term(const Term& t, const Term& from, const Term& to) {
  if (t == from) return to;
  if (t.is_role_app())
    return Term::role_app(t.role(), rewrite_term(t.arg(), from, to));
  return t;
}

FormulaPtr rewrite_formula(const FormulaPtr& f, const Term& from,
                           const Term& to) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      std::vector<Term> args;
      for (const Term& t : f->args) args.push_back(rewrite_term(t, from, to));
      return mk_atom(f->pred, std::move(args));
    }
    case Formula::Kind::Eq:
      return mk_eq(rewrite_term(f->lhs, from, to),
                   rewrite_term(f->rhs, from, to));
    default:
      return f;
  }
}

bool pool_contains(const ProofState& s, const FormulaPtr& f) {
  for (const ProofState::Labeled& p : s.premises)
    if (equal(p.formula, f)) return true;
  return false;
}

Term resolve_term(const Term& t, const std::map<int, Term>& b) {
  Term d = deref(t, b);
  if (d.is_role_app()) return Term::role_app(d.role(), resolve_term(d.arg(), b));
  return d;
}

}  // namespace

FormulaPtr resolve_metas(const FormulaPtr& f,
                         const std::map<int, Term>& bindings) {
  switch (f->kind) {
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Atom: {
      std::vector<Term> args;
      for (const Term& t : f->args) args.push_back(resolve_term(t, bindings));
      return mk_atom(f->pred, std::move(args));
    }
    case Formula::Kind::Eq:
      return mk_eq(resolve_term(f->lhs, bindings),
                   resolve_term(f->rhs, bindings));
    case Formula::Kind::Not:
      return mk_not(resolve_metas(f->child, bindings));
    case Formula::Kind::And:
      return mk_and(resolve_metas(f->left, bindings),
                    resolve_metas(f->right, bindings));
    case Formula::Kind::Imp:
      return mk_imp(resolve_metas(f->left, bindings),
                    resolve_metas(f->right, bindings));
    case Formula::Kind::Exists:
      return mk_exists(f->var, resolve_metas(f->body, bindings));
    case Formula::Kind::Forall:
      return mk_forall(f->var, resolve_metas(f->body, bindings));
  }
  return f;
}

ProofState make_state(const FormulaPtr& premise, const FormulaPtr& goal,
                      const ProverConfig& cfg) {
  ProofState s;
  s.step_budget = cfg.step_budget;
  collect_constant_names(*premise, s.used_names);
  collect_constant_names(*goal, s.used_names);
  s.premises.push_back({next_premise_label(s), premise});
  s.goals.push_back({next_goal_label(s), goal});
  return s;
}

void decompose_premises(ProofState& s) {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < s.premises.size(); ++i) {
      const FormulaPtr f = s.premises[i].formula;
      const std::string label = s.premises[i].label;
      if (f->kind == Formula::Kind::Exists) {
        std::map<Term, Term> sub;
        FormulaPtr body = f;
        while (body->kind == Formula::Kind::Exists) {
          sub.emplace(body->var, fresh_skolem(s, body->var));
          body = body->body;
        }
        FormulaPtr inst = substitute(body, sub);
        s.premises.erase(s.premises.begin() + static_cast<std::ptrdiff_t>(i));
        std::string out = next_premise_label(s);
        append_step(s, Rule::ExistsElim, {label}, {out});
        s.premises.push_back({out, inst});
        changed = true;
        break;
      }
      if (f->kind == Formula::Kind::And) {
        std::vector<FormulaPtr> parts;
        flatten_and(f, parts);
        s.premises.erase(s.premises.begin() + static_cast<std::ptrdiff_t>(i));
        std::vector<std::string> outs;
        for (const FormulaPtr& part : parts) {
          outs.push_back(next_premise_label(s));
          s.premises.push_back({outs.back(), part});
        }
        append_step(s, Rule::AndElim, {label}, outs);
        changed = true;
        break;
      }
    }
  }
}

void decompose_goal(ProofState& s) {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < s.goals.size(); ++i) {
      const FormulaPtr f = s.goals[i].formula;
      const std::string label = s.goals[i].label;
      if (f->kind == Formula::Kind::Exists) {
        std::map<Term, Term> sub;
        FormulaPtr body = f;
        while (body->kind == Formula::Kind::Exists) {
          sub.emplace(body->var, Term::meta(s.fresh_counter++, body->var.sort(),
                                            body->var.name()));
          body = body->body;
        }
        FormulaPtr inst = substitute(body, sub);
        s.goals.erase(s.goals.begin() + static_cast<std::ptrdiff_t>(i));
        std::string out = next_goal_label(s);
        append_step(s, Rule::ExistsIntro, {label}, {out});
        s.goals.push_back({out, inst});
        changed = true;
        break;
      }
      if (f->kind == Formula::Kind::And) {
        std::vector<FormulaPtr> parts;
        flatten_and(f, parts);
        s.goals.erase(s.goals.begin() + static_cast<std::ptrdiff_t>(i));
        std::vector<std::string> outs;
        for (const FormulaPtr& part : parts) {
          outs.push_back(next_goal_label(s));
          s.goals.push_back({outs.back(), part});
        }
        append_step(s, Rule::AndIntro, {label}, outs);
        changed = true;
        break;
      }
      if (f->kind == Formula::Kind::Not || f->kind == Formula::Kind::Imp) {
        bool is_neg = f->kind == Formula::Kind::Not;
        FormulaPtr antecedent = is_neg ? f->child : f->left;
        FormulaPtr consequent = is_neg ? mk_false() : f->right;
        s.goals.erase(s.goals.begin() + static_cast<std::ptrdiff_t>(i));
        std::string pout = next_premise_label(s);
        std::string gout = next_goal_label(s);
        append_step(s, is_neg ? Rule::NegIntro : Rule::ImpIntro, {label},
                    {pout, gout});
        s.premises.push_back({pout, antecedent});
        s.goals.push_back({gout, consequent});
        decompose_premises(s);
        changed = true;
        break;
      }
    }
  }
  s.total_subgoals =
      static_cast<int>(s.goals.size()) + static_cast<int>(s.matched.size());
}

std::optional<std::map<int, Term>> match_subgoal(ProofState& s,
                                                 const std::string& goal_label) {
  std::size_t gi = s.goals.size();
  for (std::size_t i = 0; i < s.goals.size(); ++i)
    if (s.goals[i].label == goal_label) {
      gi = i;
      break;
    }
  if (gi == s.goals.size() || !is_atomic(*s.goals[gi].formula))
    return std::nullopt;
  const FormulaPtr goal = s.goals[gi].formula;

  auto finish = [&](const std::string& premise_label) {
    append_step(s, Rule::Match, {goal_label, premise_label}, {});
    s.matched.push_back(s.goals[gi]);
    s.goals.erase(s.goals.begin() + static_cast<std::ptrdiff_t>(gi));
    return s.bindings;
  };

  for (const ProofState::Labeled& p : s.premises) {
    if (!is_atomic(*p.formula)) continue;
    if (unify(*goal, *p.formula, s.bindings)) return finish(p.label);
  }

  // Retry allowing one equality rewrite of a candidate premise.
  const std::size_t pool_size = s.premises.size();
  for (std::size_t ci = 0; ci < pool_size; ++ci) {
    if (!is_atomic(*s.premises[ci].formula)) continue;
    for (std::size_t ei = 0; ei < pool_size; ++ei) {
      if (ei == ci || s.premises[ei].formula->kind != Formula::Kind::Eq)
        continue;
      const Formula& eq = *s.premises[ei].formula;
      for (int orient = 0; orient < 2; ++orient) {
        const Term& from = orient == 0 ? eq.lhs : eq.rhs;
        const Term& to = orient == 0 ? eq.rhs : eq.lhs;
        FormulaPtr rewritten =
            rewrite_formula(s.premises[ci].formula, from, to);
        if (equal(rewritten, s.premises[ci].formula)) continue;
        if (pool_contains(s, rewritten)) continue;
        if (!unify(*goal, *rewritten, s.bindings)) continue;
        std::string out = next_premise_label(s);
        append_step(s, Rule::EqElim,
                    {s.premises[ei].label, s.premises[ci].label}, {out});
        s.premises.push_back({out, rewritten});
        return finish(out);
      }
    }
  }
  return std::nullopt;
}

namespace {

void saturate_axioms(ProofState& s, const std::vector<Axiom>& axioms) {
  if (axioms.empty()) return;
  std::vector<std::string> axiom_labels(axioms.size());
  for (std::size_t pi = 0; pi < s.premises.size(); ++pi) {
    const FormulaPtr f = s.premises[pi].formula;
    if (f->kind != Formula::Kind::Atom || f->args.size() != 1) continue;
    for (std::size_t ai = 0; ai < axioms.size(); ++ai) {
      const Axiom& ax = axioms[ai];
      if (ax.source != f->pred || f->args[0].sort() != ax.var_sort) continue;
      FormulaPtr derived;
      if (ax.negated) {
        // Exclusive reading: the antonym axiom rules out any event/entity
        // with the target predicate, not just the shared argument.
        Term y = Term::var(ax.var_sort == Sort::Event ? "e1" : "x1",
                           ax.var_sort);
        derived = mk_not(mk_exists(y, mk_atom(ax.target, {y})));
      } else {
        derived = mk_atom(ax.target, {f->args[0]});
      }
      if (pool_contains(s, derived)) continue;
      if (axiom_labels[ai].empty()) {
        axiom_labels[ai] = next_premise_label(s);
        append_step(s, Rule::AxiomUse, {}, {axiom_labels[ai]});
        s.premises.push_back({axiom_labels[ai], ax.formula()});
        if (std::find(s.axioms_fired.begin(), s.axioms_fired.end(), ax) ==
            s.axioms_fired.end())
          s.axioms_fired.push_back(ax);
      }
      std::string out = next_premise_label(s);
      append_step(s, Rule::ImpElim, {axiom_labels[ai], s.premises[pi].label},
                  {out});
      s.premises.push_back({out, derived});
    }
  }
}

void run_matching(ProofState& s) {
  for (bool progress = true; progress && !s.goals.empty();) {
    progress = false;
    std::vector<std::string> pending;
    for (const ProofState::Labeled& g : s.goals) pending.push_back(g.label);
    for (const std::string& label : pending)
      if (match_subgoal(s, label)) progress = true;
  }
}

// Discharges a pending False goal by finding a negative premise ~W and
// assembling a proof of W from pool atoms: ∧-Intro over the matched atoms,
// ∃-Intro up to W, then ¬-Elim.
bool try_neg_elim(ProofState& s) {
  std::size_t gi = s.goals.size();
  for (std::size_t i = 0; i < s.goals.size(); ++i)
    if (s.goals[i].formula->kind == Formula::Kind::False) {
      gi = i;
      break;
    }
  if (gi == s.goals.size()) return false;

  for (std::size_t ni = 0; ni < s.premises.size(); ++ni) {
    if (s.premises[ni].formula->kind != Formula::Kind::Not) continue;
    const std::string neg_label = s.premises[ni].label;
    FormulaPtr w = s.premises[ni].formula->child;

    std::map<Term, Term> sub;
    int local_counter = s.fresh_counter;
    FormulaPtr body = w;
    while (body->kind == Formula::Kind::Exists) {
      sub.emplace(body->var, Term::meta(local_counter++, body->var.sort(),
                                        body->var.name()));
      body = body->body;
    }
    std::vector<FormulaPtr> atoms;
    flatten_and(body, atoms);
    if (!std::all_of(atoms.begin(), atoms.end(),
                     [](const FormulaPtr& a) { return is_atomic(*a); }))
      continue;

    std::map<int, Term> trial = s.bindings;
    std::vector<std::string> witness_labels;
    std::vector<FormulaPtr> instantiated;
    bool ok = true;
    for (const FormulaPtr& atom : atoms) {
      FormulaPtr inst = sub.empty() ? atom : substitute(atom, sub);
      instantiated.push_back(inst);
      bool found = false;
      for (const ProofState::Labeled& p : s.premises) {
        if (!is_atomic(*p.formula)) continue;
        if (unify(*inst, *p.formula, trial)) {
          witness_labels.push_back(p.label);
          found = true;
          break;
        }
      }
      if (!found) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    s.bindings = trial;
    s.fresh_counter = local_counter;
    std::string wlabel = witness_labels.front();
    if (instantiated.size() > 1) {
      FormulaPtr conj = resolve_metas(instantiated.back(), s.bindings);
      for (std::size_t i = instantiated.size() - 1; i-- > 0;)
        conj = mk_and(resolve_metas(instantiated[i], s.bindings), conj);
      wlabel = next_premise_label(s);
      append_step(s, Rule::AndIntro, witness_labels, {wlabel});
      s.premises.push_back({wlabel, conj});
    }
    if (!sub.empty()) {
      std::string out = next_premise_label(s);
      append_step(s, Rule::ExistsIntro, {wlabel}, {out});
      s.premises.push_back({out, w});
      wlabel = out;
    }
    append_step(s, Rule::NegElim, {s.goals[gi].label, neg_label, wlabel}, {});
    s.matched.push_back(s.goals[gi]);
    s.goals.erase(s.goals.begin() + static_cast<std::ptrdiff_t>(gi));
    return true;
  }
  return false;
}

void count_cases(const Term& t, CaseCounts& c) {
  if (t.is_role_app()) {
    switch (t.role()) {
      case Role::Subj: ++c.subj; break;
      case Role::Obj: ++c.obj; break;
      case Role::Dat: ++c.dat; break;
    }
    count_cases(t.arg(), c);
  }
}

void count_cases(const Formula& f, CaseCounts& c) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      for (const Term& t : f.args) count_cases(t, c);
      return;
    case Formula::Kind::Eq:
      count_cases(f.lhs, c);
      count_cases(f.rhs, c);
      return;
    case Formula::Kind::Not: count_cases(*f.child, c); return;
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      count_cases(*f.left, c);
      count_cases(*f.right, c);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      count_cases(*f.body, c);
      return;
    case Formula::Kind::False:
      return;
  }
}

ProofStatus status_from_state(const ProofState& s) {
  if (s.budget_exceeded || !s.goals.empty()) return ProofStatus::Failed;
  return s.axioms_fired.empty() ? ProofStatus::Proved
                                : ProofStatus::ProvedWithAxioms;
}

DirectionResult result_from_state(const ProofState& s, ProofStatus status) {
  DirectionResult r;
  r.status = status;
  r.axioms_used = s.axioms_fired;
  for (const ProofState::Labeled& g : s.matched)
    r.matched_subgoals.push_back(resolve_metas(g.formula, s.bindings));
  for (const ProofState::Labeled& p : s.premises)
    r.premise_pool.push_back(p.label + ": " + print_formula(p.formula));
  r.subgoal_stats.total_subgoals = s.total_subgoals;
  r.subgoal_stats.proved_before_injection = static_cast<int>(s.matched.size());
  r.subgoal_stats.proved_after_injection = static_cast<int>(s.matched.size());
  r.subgoal_stats.premise_pool_size = static_cast<int>(s.premises.size());
  r.trace = s.trace;
  return r;
}

struct DirectionRun {
  DirectionResult result;
  ProofState state;
};

DirectionRun prove_direction_run(const FormulaPtr& premise,
                                 const FormulaPtr& conclusion,
                                 const std::vector<Axiom>& axioms,
                                 const ProverConfig& cfg) {
  ProofState s = make_state(premise, conclusion, cfg);
  try {
    decompose_premises(s);
    saturate_axioms(s, axioms);
    std::size_t pool_before = s.premises.size();
    decompose_goal(s);
    if (s.premises.size() != pool_before) saturate_axioms(s, axioms);
    run_matching(s);
  } catch (const BudgetExceeded&) {
    s.budget_exceeded = true;
  }
  return {result_from_state(s, status_from_state(s)), std::move(s)};
}

DirectionRun prove_negation_run(const FormulaPtr& premise,
                                const FormulaPtr& conclusion,
                                const std::vector<Axiom>& axioms,
                                const ProverConfig& cfg) {
  ProofState s = make_state(premise, mk_not(conclusion), cfg);
  try {
    decompose_premises(s);
    decompose_goal(s);
    saturate_axioms(s, axioms);
    run_matching(s);
    while (!s.goals.empty() && try_neg_elim(s)) {
    }
  } catch (const BudgetExceeded&) {
    s.budget_exceeded = true;
  }
  ProofStatus status = !s.budget_exceeded && s.goals.empty()
                           ? ProofStatus::NegationProved
                           : ProofStatus::Failed;
  return {result_from_state(s, status), std::move(s)};
}

}  // namespace

DirectionResult prove_direction(const FormulaPtr& premise,
                                const FormulaPtr& conclusion,
                                const std::vector<Axiom>& axioms,
                                const ProverConfig& cfg) {
  return prove_direction_run(premise, conclusion, axioms, cfg).result;
}

DirectionResult prove_negation(const FormulaPtr& premise,
                               const FormulaPtr& conclusion,
                               const std::vector<Axiom>& axioms,
                               const ProverConfig& cfg) {
  return prove_negation_run(premise, conclusion, axioms, cfg).result;
}

DirectionResult skip_unproved(ProofState& s) {
  DirectionResult r = result_from_state(s, status_from_state(s));
  if (s.goals.empty() || s.budget_exceeded) return r;
  std::vector<ProofState::Labeled> pending = s.goals;
  try {
    for (const ProofState::Labeled& g : pending) {
      FormulaPtr resolved = resolve_metas(g.formula, s.bindings);
      append_step(s, Rule::Skip, {g.label}, {});
      r.skipped_subgoals.push_back(resolved);
      count_cases(*resolved, r.case_counts_unproved);
    }
  } catch (const BudgetExceeded&) {
    s.budget_exceeded = true;
    r.status = ProofStatus::Failed;
    r.trace = s.trace;
    return r;
  }
  s.goals.clear();
  r.status = ProofStatus::ProvedWithSkips;
  r.trace = s.trace;
  return r;
}

BidirectionalResult run_pipeline(const FormulaPtr& a, const FormulaPtr& b,
                                 const Lexicon& kb, const ProverConfig& cfg) {
  auto axioms_for = [&](const ProofState& s) {
    std::vector<FormulaPtr> pool, unproved;
    for (const ProofState::Labeled& p : s.premises) pool.push_back(p.formula);
    for (const ProofState::Labeled& g : s.goals)
      unproved.push_back(resolve_metas(g.formula, s.bindings));
    return generate_axioms(pool, unproved, kb, cfg.lexicon);
  };

  struct Side {
    FormulaPtr premise, conclusion;
    DirectionRun stage1;
    DirectionRun last;  // most recent entailment attempt
    std::vector<Axiom> axioms;
    std::optional<DirectionResult> final;
  };
  Side fwd{a, b, {}, {}, {}, {}};
  Side bwd{b, a, {}, {}, {}, {}};

  for (Side* side : {&fwd, &bwd}) {
    side->stage1 =
        prove_direction_run(side->premise, side->conclusion, {}, cfg);
    if (side->stage1.result.status == ProofStatus::Proved)
      side->final = side->stage1.result;
  }

  const bool contradiction_allowed = !fwd.final && !bwd.final;
  if (contradiction_allowed)
    for (Side* side : {&fwd, &bwd}) {
      DirectionRun neg =
          prove_negation_run(side->premise, side->conclusion, {}, cfg);
      if (neg.result.status == ProofStatus::NegationProved)
        side->final = neg.result;
    }

  for (Side* side : {&fwd, &bwd}) {
    bool ran_stage3 = false;
    if (!side->final) {
      side->axioms = axioms_for(side->stage1.state);
      if (!side->axioms.empty()) {
        ran_stage3 = true;
        side->last = prove_direction_run(side->premise, side->conclusion,
                                         side->axioms, cfg);
        if (side->last.result.status == ProofStatus::Proved ||
            side->last.result.status == ProofStatus::ProvedWithAxioms)
          side->final = side->last.result;
      }
    }
    if (!side->final && contradiction_allowed && !side->axioms.empty()) {
      DirectionRun neg = prove_negation_run(side->premise, side->conclusion,
                                            side->axioms, cfg);
      if (neg.result.status == ProofStatus::NegationProved)
        side->final = neg.result;
    }
    if (!side->final) {
      ProofState& state =
          ran_stage3 ? side->last.state : side->stage1.state;
      side->final = skip_unproved(state);
    }
    int before = side->stage1.result.subgoal_stats.proved_before_injection;
    if (ran_stage3 && side->final->subgoal_stats.total_subgoals ==
                          side->stage1.result.subgoal_stats.total_subgoals)
      side->final->subgoal_stats.proved_before_injection = before;
  }

  return {*fwd.final, *bwd.final};
}

}  // namespace ndsts
