#include "ndsts/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <tuple>

namespace ndsts {

const char* sort_name(Sort s) {
  return s == Sort::Entity ? "Entity" : "Event";
}

const char* role_name(Role r) {
  switch (r) {
    case Role::Subj: return "subj";
    case Role::Obj: return "obj";
    case Role::Dat: return "dat";
  }
  return "?";
}

std::optional<Role> role_from_name(std::string_view name) {
  if (name == "subj") return Role::Subj;
  if (name == "obj") return Role::Obj;
  if (name == "dat") return Role::Dat;
  return std::nullopt;
}

Term Term::var(std::string name, Sort sort) {
  Term t;
  t.kind_ = Kind::Var;
  t.name_ = std::move(name);
  t.sort_ = sort;
  return t;
}

Term Term::constant(std::string name, Sort sort) {
  Term t;
  t.kind_ = Kind::Const;
  t.name_ = std::move(name);
  t.sort_ = sort;
  return t;
}

Term Term::meta(int id, Sort sort, std::string hint) {
  Term t;
  t.kind_ = Kind::Meta;
  t.name_ = std::move(hint);
  t.sort_ = sort;
  t.meta_id_ = id;
  return t;
}

Term Term::role_app(Role role, Term arg) {
  if (arg.sort() != Sort::Event)
    throw SortError("role function applied to non-event term " + print_term(arg));
  Term t;
  t.kind_ = Kind::RoleApp;
  t.sort_ = Sort::Entity;
  t.role_ = role;
  t.arg_ = std::make_shared<const Term>(std::move(arg));
  return t;
}

bool Term::operator==(const Term& other) const {
  if (kind_ != other.kind_ || sort_ != other.sort_) return false;
  switch (kind_) {
    case Kind::Var:
    case Kind::Const: return name_ == other.name_;
    case Kind::Meta: return meta_id_ == other.meta_id_;
    case Kind::RoleApp: return role_ == other.role_ && *arg_ == *other.arg_;
  }
  return false;
}

bool Term::operator<(const Term& other) const {
  auto key = [](const Term& t) {
    return std::tuple<int, int, const std::string&, int, int>(
        static_cast<int>(t.kind_), static_cast<int>(t.sort_), t.name_,
        t.meta_id_, static_cast<int>(t.role_));
  };
  if (key(*this) != key(other)) return key(*this) < key(other);
  if (kind_ == Kind::RoleApp) return *arg_ < *other.arg_;
  return false;
}

namespace {

FormulaPtr node(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

}  // namespace

FormulaPtr mk_false() {
  Formula f;
  f.kind = Formula::Kind::False;
  return node(std::move(f));
}

FormulaPtr mk_atom(std::string pred, std::vector<Term> args) {
  Formula f;
  f.kind = Formula::Kind::Atom;
  f.pred = std::move(pred);
  f.args = std::move(args);
  return node(std::move(f));
}

FormulaPtr mk_eq(Term lhs, Term rhs) {
  Formula f;
  f.kind = Formula::Kind::Eq;
  f.lhs = std::move(lhs);
  f.rhs = std::move(rhs);
  return node(std::move(f));
}

FormulaPtr mk_not(FormulaPtr c) {
  Formula f;
  f.kind = Formula::Kind::Not;
  f.child = std::move(c);
  return node(std::move(f));
}

FormulaPtr mk_and(FormulaPtr l, FormulaPtr r) {
  Formula f;
  f.kind = Formula::Kind::And;
  f.left = std::move(l);
  f.right = std::move(r);
  return node(std::move(f));
}

FormulaPtr mk_imp(FormulaPtr l, FormulaPtr r) {
  Formula f;
  f.kind = Formula::Kind::Imp;
  f.left = std::move(l);
  f.right = std::move(r);
  return node(std::move(f));
}

FormulaPtr mk_exists(Term var, FormulaPtr body) {
  Formula f;
  f.kind = Formula::Kind::Exists;
  f.var = std::move(var);
  f.body = std::move(body);
  return node(std::move(f));
}

FormulaPtr mk_forall(Term var, FormulaPtr body) {
  Formula f;
  f.kind = Formula::Kind::Forall;
  f.var = std::move(var);
  f.body = std::move(body);
  return node(std::move(f));
}

bool equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::False: return true;
    case Formula::Kind::Atom: return a.pred == b.pred && a.args == b.args;
    case Formula::Kind::Eq: return a.lhs == b.lhs && a.rhs == b.rhs;
    case Formula::Kind::Not: return equal(*a.child, *b.child);
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      return equal(*a.left, *b.left) && equal(*a.right, *b.right);
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      return a.var == b.var && equal(*a.body, *b.body);
  }
  return false;
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  return a == b || equal(*a, *b);
}

ParseError::ParseError(const std::string& msg, size_t line, size_t column)
    : FormulaError(msg + " at line " + std::to_string(line) + ", column " +
                   std::to_string(column)),
      line(line),
      column(column) {}

bool is_var_name(std::string_view name) {
  if (name.size() < 2) return false;
  if (name[0] != 'e' && name[0] != 'x') return false;
  return std::all_of(name.begin() + 1, name.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

Sort var_sort(std::string_view name) {
  return name[0] == 'e' ? Sort::Event : Sort::Entity;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
  End, LParen, RParen, Comma, Dot, Tilde, Amp, Arrow, Equals, Ident,
  KwFalse, KwExists, KwForall
};

struct Token {
  Tok kind;
  std::string text;
  size_t line, column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.column = col_;
    tok_.text.clear();
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        take();
      tok_.text = std::string(src_.substr(start, pos_ - start));
      if (tok_.text == "False") tok_.kind = Tok::KwFalse;
      else if (tok_.text == "exists") tok_.kind = Tok::KwExists;
      else if (tok_.text == "forall") tok_.kind = Tok::KwForall;
      else tok_.kind = Tok::Ident;
      return;
    }
    switch (c) {
      case '(': take(); tok_.kind = Tok::LParen; return;
      case ')': take(); tok_.kind = Tok::RParen; return;
      case ',': take(); tok_.kind = Tok::Comma; return;
      case '.': take(); tok_.kind = Tok::Dot; return;
      case '~': take(); tok_.kind = Tok::Tilde; return;
      case '&': take(); tok_.kind = Tok::Amp; return;
      case '=': take(); tok_.kind = Tok::Equals; return;
      case '-':
        take();
        if (pos_ < src_.size() && src_[pos_] == '>') {
          take();
          tok_.kind = Tok::Arrow;
          return;
        }
        throw ParseError("expected '->'", line_, col_);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_,
                         col_);
    }
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        break;
      }
    }
  }

  void take() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  size_t pos_ = 0;
  size_t line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  Parser(std::string_view src, const Signature& sig) : lex_(src), sig_(sig) {}

  FormulaPtr parse() {
    FormulaPtr f = formula();
    expect(Tok::End, "end of input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, lex_.peek().line, lex_.peek().column);
  }

  Token expect(Tok kind, const char* what) {
    if (lex_.peek().kind != kind) fail(std::string("expected ") + what);
    return lex_.next();
  }

  // formula := and_chain ("->" formula)?   (right-associative)
  FormulaPtr formula() {
    FormulaPtr left = conjunction();
    if (lex_.peek().kind == Tok::Arrow) {
      lex_.next();
      return mk_imp(std::move(left), formula());
    }
    return left;
  }

  FormulaPtr conjunction() {
    FormulaPtr left = unary();
    if (lex_.peek().kind == Tok::Amp) {
      lex_.next();
      return mk_and(std::move(left), conjunction());
    }
    return left;
  }

  FormulaPtr unary() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Tilde:
        lex_.next();
        return mk_not(unary());
      case Tok::KwFalse:
        lex_.next();
        return mk_false();
      case Tok::KwExists:
      case Tok::KwForall:
        return quantified();
      case Tok::LParen: {
        lex_.next();
        FormulaPtr f = formula();
        expect(Tok::RParen, "')'");
        // A parenthesized term would have been an atom; thus '=' may follow a
        // closing paren only for role applications, which term() handles.
        return f;
      }
      case Tok::Ident:
        return atom_or_eq();
      default:
        fail("expected a formula");
    }
  }

  FormulaPtr quantified() {
    Token q = lex_.next();
    std::vector<Term> vars;
    while (lex_.peek().kind == Tok::Ident && !role_from_name(lex_.peek().text)) {
      Token v = lex_.next();
      if (!is_var_name(v.text))
        throw ParseError("quantified name '" + v.text +
                             "' is not a variable (expected e<digits> or x<digits>)",
                         v.line, v.column);
      vars.push_back(Term::var(v.text, var_sort(v.text)));
    }
    if (vars.empty()) fail("expected at least one variable after quantifier");
    expect(Tok::Dot, "'.' after quantifier variables");
    FormulaPtr f = formula();
    for (auto it = vars.rbegin(); it != vars.rend(); ++it)
      f = q.kind == Tok::KwExists ? mk_exists(*it, std::move(f))
                                  : mk_forall(*it, std::move(f));
    return f;
  }

  // atom := IDENT "(" term ("," term)* ")" ; eq := term "=" term
  FormulaPtr atom_or_eq() {
    Token id = lex_.peek();
    if (!role_from_name(id.text) && !is_var_name(id.text)) {
      // Plain identifier: predicate application or a constant starting an
      // equality.
      lex_.next();
      if (lex_.peek().kind == Tok::LParen) {
        lex_.next();
        std::vector<Term> args;
        args.push_back(term());
        while (lex_.peek().kind == Tok::Comma) {
          lex_.next();
          args.push_back(term());
        }
        expect(Tok::RParen, "')'");
        if (args.size() > 2)
          throw ParseError("predicate '" + id.text + "' has arity " +
                               std::to_string(args.size()) +
                               "; only arity 1 or 2 is supported",
                           id.line, id.column);
        return mk_atom(id.text, std::move(args));
      }
      Term lhs = constant_term(id);
      expect(Tok::Equals, "'=' after term");
      return mk_eq(std::move(lhs), term());
    }
    Term lhs = term();
    expect(Tok::Equals, "'=' after term");
    return mk_eq(std::move(lhs), term());
  }

  Term term() {
    Token t = expect(Tok::Ident, "a term");
    if (auto role = role_from_name(t.text)) {
      expect(Tok::LParen, "'(' after role function");
      Term inner = term();
      Token close = lex_.peek();
      expect(Tok::RParen, "')'");
      if (inner.sort() != Sort::Event)
        throw ParseError("role function " + t.text +
                             " applied to non-event term " + print_term(inner),
                         close.line, close.column);
      return Term::role_app(*role, std::move(inner));
    }
    if (is_var_name(t.text)) return Term::var(t.text, var_sort(t.text));
    return constant_term(t);
  }

  Term constant_term(const Token& t) {
    auto it = sig_.constants.find(t.text);
    Sort s = it != sig_.constants.end() ? it->second : Sort::Entity;
    return Term::constant(t.text, s);
  }

  Lexer lex_;
  const Signature& sig_;
};

void collect_free(const Formula& f, std::set<Term>& bound, std::set<Term>& out) {
  auto visit_term = [&](const Term& t, auto&& self) -> void {
    if (t.is_var() && !bound.count(t)) out.insert(t);
    if (t.is_role_app()) self(t.arg(), self);
  };
  switch (f.kind) {
    case Formula::Kind::False: return;
    case Formula::Kind::Atom:
      for (const Term& t : f.args) visit_term(t, visit_term);
      return;
    case Formula::Kind::Eq:
      visit_term(f.lhs, visit_term);
      visit_term(f.rhs, visit_term);
      return;
    case Formula::Kind::Not: collect_free(*f.child, bound, out); return;
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      collect_free(*f.left, bound, out);
      collect_free(*f.right, bound, out);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool inserted = bound.insert(f.var).second;
      collect_free(*f.body, bound, out);
      if (inserted) bound.erase(f.var);
      return;
    }
  }
}

}  // namespace

std::set<Term> free_vars(const Formula& f) {
  std::set<Term> bound, out;
  collect_free(f, bound, out);
  return out;
}

void check_sorts(const Formula& f, Signature& sig) {
  switch (f.kind) {
    case Formula::Kind::False: return;
    case Formula::Kind::Atom: {
      if (f.args.empty() || f.args.size() > 2)
        throw SortError("predicate " + f.pred + " has unsupported arity " +
                        std::to_string(f.args.size()));
      std::vector<Sort> sorts;
      for (const Term& t : f.args) sorts.push_back(t.sort());
      auto [it, inserted] = sig.predicates.emplace(f.pred, sorts);
      if (!inserted && it->second != sorts) {
        std::ostringstream os;
        os << "predicate " << f.pred << " used with signature (";
        for (size_t i = 0; i < sorts.size(); ++i)
          os << (i ? ", " : "") << sort_name(sorts[i]);
        os << ") but previously declared with (";
        for (size_t i = 0; i < it->second.size(); ++i)
          os << (i ? ", " : "") << sort_name(it->second[i]);
        os << ")";
        throw SortError(os.str());
      }
      return;
    }
    case Formula::Kind::Eq:
      if (f.lhs.sort() != f.rhs.sort())
        throw SortError("equality between " + print_term(f.lhs) + " (" +
                        sort_name(f.lhs.sort()) + ") and " + print_term(f.rhs) +
                        " (" + sort_name(f.rhs.sort()) + ")");
      return;
    case Formula::Kind::Not: check_sorts(*f.child, sig); return;
    case Formula::Kind::And:
    case Formula::Kind::Imp:
      check_sorts(*f.left, sig);
      check_sorts(*f.right, sig);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      check_sorts(*f.body, sig);
      return;
  }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string print_term(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const:
    case Term::Kind::Meta:
      return t.name();
    case Term::Kind::RoleApp:
      return std::string(role_name(t.role())) + "(" + print_term(t.arg()) + ")";
  }
  return "?";
}

namespace {

// `rightmost` is true when the node extends to the end of the enclosing
// formula, in which case a quantifier needs no parentheses (its scope is
// maximal anyway).
void print_rec(const Formula& f, bool rightmost, std::string& out) {
  switch (f.kind) {
    case Formula::Kind::False:
      out += "False";
      return;
    case Formula::Kind::Atom: {
      out += f.pred;
      out += '(';
      for (size_t i = 0; i < f.args.size(); ++i) {
        if (i) out += ", ";
        out += print_term(f.args[i]);
      }
      out += ')';
      return;
    }
    case Formula::Kind::Eq:
      out += print_term(f.lhs);
      out += " = ";
      out += print_term(f.rhs);
      return;
    case Formula::Kind::Not: {
      const Formula& c = *f.child;
      bool bare = c.kind == Formula::Kind::False ||
                  c.kind == Formula::Kind::Atom ||
                  c.kind == Formula::Kind::Eq ||
                  c.kind == Formula::Kind::Not ||
                  ((c.kind == Formula::Kind::Exists ||
                    c.kind == Formula::Kind::Forall) &&
                   rightmost);
      if (bare) {
        out += c.kind == Formula::Kind::Exists || c.kind == Formula::Kind::Forall
                   ? "~ "
                   : "~";
        print_rec(c, rightmost, out);
      } else {
        out += "~(";
        print_rec(c, true, out);
        out += ')';
      }
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Imp: {
      bool is_and = f.kind == Formula::Kind::And;
      const Formula& l = *f.left;
      bool wrap_left = l.kind == Formula::Kind::Imp ||
                       l.kind == Formula::Kind::Exists ||
                       l.kind == Formula::Kind::Forall ||
                       (is_and && l.kind == Formula::Kind::And);
      if (wrap_left) {
        out += '(';
        print_rec(l, true, out);
        out += ')';
      } else {
        print_rec(l, false, out);
      }
      out += is_and ? " & " : " -> ";
      print_rec(*f.right, rightmost, out);
      return;
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      out += f.kind == Formula::Kind::Exists ? "exists" : "forall";
      const Formula* cur = &f;
      while (cur->kind == f.kind) {
        out += ' ';
        out += cur->var.name();
        cur = cur->body.get();
      }
      out += " . ";
      print_rec(*cur, true, out);
      return;
    }
  }
}

}  // namespace

std::string print_formula(const Formula& f) {
  std::string out;
  print_rec(f, true, out);
  return out;
}

std::string print_formula(const FormulaPtr& f) { return print_formula(*f); }

// ---------------------------------------------------------------------------
// Substitution and renaming
// ---------------------------------------------------------------------------

namespace {

Term subst_term(const Term& t, const std::map<Term, Term>& binding) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = binding.find(t);
      if (it == binding.end()) return t;
      if (it->second.sort() != t.sort())
        throw SortError("substitution maps " + t.name() + " (" +
                        sort_name(t.sort()) + ") to " + print_term(it->second) +
                        " (" + sort_name(it->second.sort()) + ")");
      return it->second;
    }
    case Term::Kind::Const:
    case Term::Kind::Meta:
      return t;
    case Term::Kind::RoleApp:
      return Term::role_app(t.role(), subst_term(t.arg(), binding));
  }
  return t;
}

bool term_mentions_var(const Term& t, const Term& v) {
  if (t == v) return true;
  if (t.is_role_app()) return term_mentions_var(t.arg(), v);
  return false;
}

FormulaPtr subst_rec(const FormulaPtr& f, const std::map<Term, Term>& binding) {
  if (binding.empty()) return f;
  switch (f->kind) {
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Atom: {
      std::vector<Term> args;
      args.reserve(f->args.size());
      for (const Term& t : f->args) args.push_back(subst_term(t, binding));
      return mk_atom(f->pred, std::move(args));
    }
    case Formula::Kind::Eq:
      return mk_eq(subst_term(f->lhs, binding), subst_term(f->rhs, binding));
    case Formula::Kind::Not:
      return mk_not(subst_rec(f->child, binding));
    case Formula::Kind::And:
      return mk_and(subst_rec(f->left, binding), subst_rec(f->right, binding));
    case Formula::Kind::Imp:
      return mk_imp(subst_rec(f->left, binding), subst_rec(f->right, binding));
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      std::map<Term, Term> inner = binding;
      inner.erase(f->var);
      if (inner.empty()) return f;
      bool captured = false;
      for (const auto& [from, to] : inner)
        captured = captured || term_mentions_var(to, f->var);
      Term var = f->var;
      FormulaPtr body = f->body;
      if (captured) {
        std::set<Term> avoid = free_vars(*f->body);
        for (const auto& [from, to] : inner) {
          avoid.insert(from);
          if (to.is_var()) avoid.insert(to);
          if (to.is_role_app() && to.arg().is_var()) avoid.insert(to.arg());
        }
        int i = 1;
        Term fresh;
        do {
          std::string name =
              (f->var.sort() == Sort::Event ? "e" : "x") + std::to_string(i++);
          fresh = Term::var(name, f->var.sort());
        } while (avoid.count(fresh));
        body = subst_rec(body, {{var, fresh}});
        var = fresh;
      }
      FormulaPtr new_body = subst_rec(body, inner);
      return f->kind == Formula::Kind::Exists ? mk_exists(var, new_body)
                                              : mk_forall(var, new_body);
    }
  }
  return f;
}

struct Renamer {
  std::set<std::string> reserved;  // free-variable names that must not be reused
  int next_entity = 1;
  int next_event = 1;

  Term fresh(Sort s) {
    int& counter = s == Sort::Event ? next_event : next_entity;
    for (;;) {
      std::string name =
          (s == Sort::Event ? "e" : "x") + std::to_string(counter++);
      if (!reserved.count(name)) return Term::var(name, s);
    }
  }

  FormulaPtr walk(const FormulaPtr& f, std::map<Term, Term>& env) {
    switch (f->kind) {
      case Formula::Kind::False:
        return f;
      case Formula::Kind::Atom: {
        std::vector<Term> args;
        args.reserve(f->args.size());
        for (const Term& t : f->args) args.push_back(subst_term(t, env));
        return mk_atom(f->pred, std::move(args));
      }
      case Formula::Kind::Eq:
        return mk_eq(subst_term(f->lhs, env), subst_term(f->rhs, env));
      case Formula::Kind::Not:
        return mk_not(walk(f->child, env));
      case Formula::Kind::And:
        return mk_and(walk(f->left, env), walk(f->right, env));
      case Formula::Kind::Imp:
        return mk_imp(walk(f->left, env), walk(f->right, env));
      case Formula::Kind::Exists:
      case Formula::Kind::Forall: {
        Term nv = fresh(f->var.sort());
        auto saved = env.find(f->var) != env.end()
                         ? std::optional<Term>(env[f->var])
                         : std::nullopt;
        env[f->var] = nv;
        FormulaPtr body = walk(f->body, env);
        if (saved) env[f->var] = *saved;
        else env.erase(f->var);
        return f->kind == Formula::Kind::Exists ? mk_exists(nv, body)
                                                : mk_forall(nv, body);
      }
    }
    return f;
  }
};

}  // namespace

FormulaPtr substitute(const FormulaPtr& f, const std::map<Term, Term>& binding) {
  return subst_rec(f, binding);
}

FormulaPtr alpha_rename(const FormulaPtr& f) {
  Renamer r;
  for (const Term& v : free_vars(*f)) r.reserved.insert(v.name());
  std::map<Term, Term> env;
  return r.walk(f, env);
}

bool alpha_equivalent(const FormulaPtr& a, const FormulaPtr& b) {
  return equal(alpha_rename(a), alpha_rename(b));
}

FormulaPtr parse_formula(std::string_view text, Signature& sig,
                         const ParseOptions& opts) {
  Parser p(text, sig);
  FormulaPtr f = p.parse();
  check_sorts(*f, sig);
  if (!opts.allow_free) {
    std::set<Term> fv = free_vars(*f);
    if (!fv.empty()) {
      std::string names;
      for (const Term& v : fv) names += (names.empty() ? "" : ", ") + v.name();
      throw FormulaError("formula has free variables: " + names);
    }
  }
  return alpha_rename(f);
}

FormulaPtr parse_formula(std::string_view text) {
  Signature sig;
  return parse_formula(text, sig);
}

}  // namespace ndsts
