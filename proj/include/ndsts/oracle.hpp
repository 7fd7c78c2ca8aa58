#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "ndsts/formula.hpp"

namespace ndsts {

struct OracleError : FormulaError {
  using FormulaError::FormulaError;
};

/// Symbols to interpret, harvested from a set of formulas.
struct ModelSignature {
  std::vector<std::string> entity_constants;
  std::vector<std::string> event_constants;
  std::vector<Role> roles;
  std::vector<std::pair<std::string, std::vector<Sort>>> predicates;

  static ModelSignature from_formulas(const std::vector<FormulaPtr>& fs);
};

/// Two-sorted first-order model with explicit finite domains {0..n-1}.
/// Roles are total functions event -> entity.
struct FiniteModel {
  int n_entity = 0;
  int n_event = 0;
  std::map<std::string, int> constants;
  std::map<Role, std::vector<int>> role_interp;
  std::map<std::string, std::set<std::vector<int>>> pred_interp;
};

/// Tarskian satisfaction; existentials by exhaustive domain search.
/// Throws OracleError for symbols the model does not interpret.
bool satisfies(const FiniteModel& m, const Formula& f);
bool satisfies(const FiniteModel& m, const FormulaPtr& f);

/// Exact number of models of `sig` with the given domain sizes.
std::uint64_t count_models(const ModelSignature& sig, int n_entity, int n_event);

/// Visits every model of `sig` with the given domain sizes until the callback
/// returns false; returns false when the walk was stopped early.
bool for_each_model(const ModelSignature& sig, int n_entity, int n_event,
                    const std::function<bool(const FiniteModel&)>& visit);

/// True iff b holds in every model of a over domains of size 0..max_size per
/// sort. Bounded, hence sound only for refutation: `false` exhibits a real
/// countermodel, `true` means none exists within the bound.
bool entails_bounded(const FormulaPtr& a, const FormulaPtr& b, int max_size);

std::optional<FiniteModel> find_countermodel(const FormulaPtr& a,
                                             const FormulaPtr& b, int max_size);

/// True iff some model over domains of size 0..max_size satisfies every
/// formula in fs.
bool satisfiable_bounded(const std::vector<FormulaPtr>& fs, int max_size);

/// Knobs for the random sentence-pair generator. Defaults keep the joint
/// signature small enough for bound-3 enumeration.
struct GenParams {
  int max_events = 2;
  int max_entities = 2;
  int max_conjuncts = 6;
  int verb_pool = 2;
  int noun_pool = 2;
  double negate_prob = 0.25;
  double share_prob = 0.55;
};

/// Deterministic per seed. Both formulas are closed, well-sorted existential
/// conjunctions, optionally wrapped in one top-level negation.
std::pair<FormulaPtr, FormulaPtr> gen_pair(std::uint64_t seed,
                                           const GenParams& p = {});

}  // namespace ndsts
