#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ndsts {

enum class Sort { Entity, Event };

// Grammatical case functions from events to their participants.
enum class Role { Subj, Obj, Dat };

const char* sort_name(Sort s);
const char* role_name(Role r);
std::optional<Role> role_from_name(std::string_view name);

/// A first-order term: variable, constant, metavariable or role application.
/// Role applications wrap an Event-sorted term and denote an Entity, so terms
/// never nest deeper than one level.
class Term {
 public:
  enum class Kind { Var, Const, Meta, RoleApp };

  Term() : kind_(Kind::Var), sort_(Sort::Entity) {}

  static Term var(std::string name, Sort sort);
  static Term constant(std::string name, Sort sort);
  static Term meta(int id, Sort sort, std::string hint);
  static Term role_app(Role role, Term arg);

  Kind kind() const { return kind_; }
  Sort sort() const { return sort_; }
  /// Var/Const name; for Meta the display hint (the bound variable it stands for).
  const std::string& name() const { return name_; }
  int meta_id() const { return meta_id_; }
  Role role() const { return role_; }
  const Term& arg() const { return *arg_; }

  bool is_var() const { return kind_ == Kind::Var; }
  bool is_const() const { return kind_ == Kind::Const; }
  bool is_meta() const { return kind_ == Kind::Meta; }
  bool is_role_app() const { return kind_ == Kind::RoleApp; }

  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }
  bool operator<(const Term& other) const;

 private:
  Kind kind_;
  std::string name_;
  Sort sort_;
  int meta_id_ = -1;
  Role role_ = Role::Subj;
  std::shared_ptr<const Term> arg_;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula node for the event-semantics fragment.
struct Formula {
  enum class Kind { False, Atom, Eq, Not, And, Imp, Exists, Forall };

  Kind kind;
  std::string pred;        // Atom
  std::vector<Term> args;  // Atom
  Term lhs, rhs;           // Eq
  FormulaPtr child;        // Not
  FormulaPtr left, right;  // And, Imp
  Term var;                // Exists, Forall (always Kind::Var)
  FormulaPtr body;         // Exists, Forall
};

FormulaPtr mk_false();
FormulaPtr mk_atom(std::string pred, std::vector<Term> args);
FormulaPtr mk_eq(Term lhs, Term rhs);
FormulaPtr mk_not(FormulaPtr f);
FormulaPtr mk_and(FormulaPtr l, FormulaPtr r);
FormulaPtr mk_imp(FormulaPtr l, FormulaPtr r);
FormulaPtr mk_exists(Term var, FormulaPtr body);
FormulaPtr mk_forall(Term var, FormulaPtr body);

bool equal(const Formula& a, const Formula& b);
bool equal(const FormulaPtr& a, const FormulaPtr& b);

struct FormulaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : FormulaError {
  ParseError(const std::string& msg, size_t line, size_t column);
  size_t line, column;
};

struct SortError : FormulaError {
  using FormulaError::FormulaError;
};

/// Per-corpus symbol table. Constants default to Entity unless declared here;
/// predicate signatures are pinned by first use and checked on every later one.
struct Signature {
  std::map<std::string, Sort> constants;
  std::map<std::string, std::vector<Sort>> predicates;
};

struct ParseOptions {
  bool allow_free = false;  // accept free variables (no alpha-renaming of free names)
};

/// Parses the textual grammar, sort-checks against `sig` (extending it with
/// newly seen predicates) and returns the alpha-renamed formula.
FormulaPtr parse_formula(std::string_view text, Signature& sig,
                         const ParseOptions& opts = {});
FormulaPtr parse_formula(std::string_view text);

std::string print_term(const Term& t);
std::string print_formula(const Formula& f);
std::string print_formula(const FormulaPtr& f);

std::set<Term> free_vars(const Formula& f);

/// Capture-avoiding substitution of variables. Throws SortError when a
/// replacement term's sort differs from the variable it replaces.
FormulaPtr substitute(const FormulaPtr& f, const std::map<Term, Term>& binding);

/// Renames bound variables to the canonical scheme e1,e2,... / x1,x2,...
/// assigned in pre-order, skipping names of free variables. Idempotent.
FormulaPtr alpha_rename(const FormulaPtr& f);

bool alpha_equivalent(const FormulaPtr& a, const FormulaPtr& b);

/// Recomputes sorts bottom-up and verifies predicate signatures; used by the
/// parser and available directly for formulas built programmatically.
void check_sorts(const Formula& f, Signature& sig);

/// True when the identifier is in variable position by the prefix rule
/// (e<digits> or x<digits>).
bool is_var_name(std::string_view name);
Sort var_sort(std::string_view name);

}  // namespace ndsts
