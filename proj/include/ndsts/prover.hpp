#pragma once

#include <array>
#include <optional>

#include "ndsts/formula.hpp"
#include "ndsts/lexicon.hpp"

namespace ndsts {

enum class Rule {
  AndIntro,
  AndElim,
  ImpIntro,
  ImpElim,
  ExistsIntro,
  ExistsElim,
  EqElim,
  NegIntro,
  NegElim,
  Match,
  Skip,
  AxiomUse
};
inline constexpr int kRuleCount = 12;

const char* rule_name(Rule r);

struct RuleApplication {
  Rule rule;
  std::vector<std::string> inputs;   // labels consumed (goal first for Match)
  std::vector<std::string> outputs;  // labels produced
};

struct ProofTrace {
  std::vector<RuleApplication> steps;

  std::array<int, kRuleCount> histogram() const;
  /// Step count excluding Skip and AxiomUse.
  int proof_steps() const;
};

/// One {"step":i,"rule":...,"inputs":[...],"outputs":[...]} object per line.
std::string trace_to_jsonl(const ProofTrace& trace);

enum class ProofStatus {
  Proved,
  NegationProved,
  ProvedWithAxioms,
  ProvedWithSkips,
  Failed
};
const char* status_name(ProofStatus s);

struct SubgoalStats {
  int total_subgoals = 0;
  int proved_before_injection = 0;
  int proved_after_injection = 0;
  int premise_pool_size = 0;
};

struct CaseCounts {
  int subj = 0, obj = 0, dat = 0;
};

struct DirectionResult {
  ProofStatus status = ProofStatus::Failed;
  std::vector<Axiom> axioms_used;
  std::vector<FormulaPtr> skipped_subgoals;  // bindings applied
  std::vector<FormulaPtr> matched_subgoals;  // bindings applied
  std::vector<std::string> premise_pool;     // "label: formula" snapshots
  SubgoalStats subgoal_stats;
  CaseCounts case_counts_unproved;
  ProofTrace trace;
};

struct BidirectionalResult {
  DirectionResult forward;   // premise A, conclusion B
  DirectionResult backward;  // premise B, conclusion A
};

struct ProverConfig {
  int step_budget = 10000;
  LexiconConfig lexicon;
};

/// Working state of one directional proof. Premises and goals are labeled
/// P0,P1,... and G0,G1,...; decomposition consumes a formula from the live
/// pool and appends its parts, so the pool holds exactly the usable premises.
struct ProofState {
  struct Labeled {
    std::string label;
    FormulaPtr formula;
  };

  std::vector<Labeled> premises;  // live pool, label order
  std::vector<Labeled> goals;     // pending sub-goals, FIFO
  std::vector<Labeled> matched;   // discharged sub-goals, in match order
  std::map<int, Term> bindings;   // metavariable id -> ground term
  int fresh_counter = 0;          // next metavariable id
  ProofTrace trace;

  int premise_seq = 0;
  int goal_seq = 0;
  int total_subgoals = 0;
  std::set<std::string> used_names;  // constant names taken (skolem pool)
  std::vector<Axiom> axioms_fired;
  int step_budget = 10000;
  bool budget_exceeded = false;
};

ProofState make_state(const FormulaPtr& premise, const FormulaPtr& goal,
                      const ProverConfig& cfg = {});

/// Exhaustively applies ∃-elimination (fresh skolem constants, preferring the
/// bound variable's own name) and ∧-elimination to the premise pool. One step
/// per quantifier block or conjunction chain.
void decompose_premises(ProofState& s);

/// Exhaustively applies ∃-introduction (fresh metavariables), ∧-introduction,
/// →-introduction and ¬-introduction to pending goals; introduced antecedents
/// join the premise pool and are decomposed in turn.
void decompose_goal(ProofState& s);

/// Tries to discharge one atomic sub-goal against the pool in label order,
/// extending bindings; a failed direct pass is retried allowing one equality
/// rewrite per candidate premise. Returns the updated bindings on success.
std::optional<std::map<int, Term>> match_subgoal(ProofState& s,
                                                 const std::string& goal_label);

/// Replaces bound metavariables by their values; unbound ones keep their
/// display name.
FormulaPtr resolve_metas(const FormulaPtr& f,
                         const std::map<int, Term>& bindings);

DirectionResult prove_direction(const FormulaPtr& premise,
                                const FormulaPtr& conclusion,
                                const std::vector<Axiom>& axioms = {},
                                const ProverConfig& cfg = {});

/// Proves premise ⇒ ¬conclusion: the conclusion joins the premise pool and
/// False is derived by ¬-elimination against a negative premise whose body is
/// assembled from pool atoms.
DirectionResult prove_negation(const FormulaPtr& premise,
                               const FormulaPtr& conclusion,
                               const std::vector<Axiom>& axioms = {},
                               const ProverConfig& cfg = {});

/// Accepts all pending sub-goals, recording Skip steps and counting role
/// functions in the skipped formulas.
DirectionResult skip_unproved(ProofState& s);

/// Staged strategy per direction: entailment without axioms; contradiction
/// (only when both directions failed); entailment with generated axioms;
/// contradiction with axioms; forced completion by skipping. The first
/// succeeding stage fixes the status.
BidirectionalResult run_pipeline(const FormulaPtr& a, const FormulaPtr& b,
                                 const Lexicon& kb,
                                 const ProverConfig& cfg = {});

}  // namespace ndsts
