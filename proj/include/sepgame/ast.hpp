#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sepgame/perm.hpp"

namespace sepgame {

using Value = std::int64_t;

// Capitalised identifiers are logical variables; everything else is a
// program variable.
bool is_logical_var(std::string_view name);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Lit, Var, Add, Mul };

  Kind kind = Kind::Lit;
  Value value = 0;
  std::string name;
  ExprPtr lhs;
  ExprPtr rhs;

  static ExprPtr lit(Value v);
  static ExprPtr var(std::string name);
  static ExprPtr add(ExprPtr a, ExprPtr b);
  static ExprPtr mul(ExprPtr a, ExprPtr b);
};

int compare(const Expr& a, const Expr& b);
inline bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

/// Program variables occurring in the expression.
void collect_program_vars(const Expr& e, std::set<std::string>& out);
void collect_logical_vars(const Expr& e, std::set<std::string>& out);
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, Value>& valuation);
ExprPtr rename_var(const ExprPtr& e, const std::string& from, const std::string& to);

struct BExpr;
using BExprPtr = std::shared_ptr<const BExpr>;

struct BExpr {
  enum class Kind { True, False, And, Or, Eq };

  Kind kind = Kind::True;
  BExprPtr lhs;
  BExprPtr rhs;
  ExprPtr left;
  ExprPtr right;

  static BExprPtr truth(bool b);
  static BExprPtr conj(BExprPtr a, BExprPtr b);
  static BExprPtr disj(BExprPtr a, BExprPtr b);
  static BExprPtr eq(ExprPtr a, ExprPtr b);
};

int compare(const BExpr& a, const BExpr& b);
void collect_program_vars(const BExpr& b, std::set<std::string>& out);

struct Command;
using CommandPtr = std::shared_ptr<const Command>;

struct Command {
  enum class Kind {
    Assign,    // x := E
    Load,      // x := [E]
    Store,     // [E] := E'
    Seq,
    Par,
    Skip,
    While,
    Resource,  // resource r do C
    With,      // with r when B do C
    If,
    Alloc,     // x := alloc(E)
    Dispose,
  };

  Kind kind = Kind::Skip;
  std::string name;  // variable or resource name
  ExprPtr e1;
  ExprPtr e2;
  BExprPtr cond;
  CommandPtr c1;
  CommandPtr c2;

  static CommandPtr assign(std::string x, ExprPtr e);
  static CommandPtr load(std::string x, ExprPtr e);
  static CommandPtr store(ExprPtr loc, ExprPtr e);
  static CommandPtr seq(CommandPtr a, CommandPtr b);
  static CommandPtr par(CommandPtr a, CommandPtr b);
  static CommandPtr skip();
  static CommandPtr loop(BExprPtr b, CommandPtr body);
  static CommandPtr resource(std::string r, CommandPtr body);
  static CommandPtr with(std::string r, BExprPtr b, CommandPtr body);
  static CommandPtr ite(BExprPtr b, CommandPtr then_c, CommandPtr else_c);
  static CommandPtr alloc(std::string x, ExprPtr e);
  static CommandPtr dispose(ExprPtr e);
};

int compare(const Command& a, const Command& b);
inline bool operator==(const Command& a, const Command& b) { return compare(a, b) == 0; }

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind {
    Emp,
    True,
    False,
    Or,
    And,
    Not,
    Forall,
    Exists,
    Star,
    Own,     // own_p(x)
    OwnAny,  // own_*(x): x owned with any permission
    PointsTo,
    Eq,
    Implies,
  };

  Kind kind = Kind::Emp;
  FormulaPtr lhs;
  FormulaPtr rhs;
  std::string name;  // bound logical variable or owned program variable
  Perm perm;
  ExprPtr e1;
  ExprPtr e2;

  static FormulaPtr emp();
  static FormulaPtr truth(bool b);
  static FormulaPtr disj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr conj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr negate(FormulaPtr a);
  static FormulaPtr forall(std::string x, FormulaPtr body);
  static FormulaPtr exists(std::string x, FormulaPtr body);
  static FormulaPtr star(FormulaPtr a, FormulaPtr b);
  static FormulaPtr own(Perm p, std::string x);
  static FormulaPtr own_any(std::string x);
  static FormulaPtr points_to(ExprPtr loc, Perm p, ExprPtr value);
  static FormulaPtr eq(ExprPtr a, ExprPtr b);
  static FormulaPtr implies(FormulaPtr a, FormulaPtr b);
};

int compare(const Formula& a, const Formula& b);
inline bool operator==(const Formula& a, const Formula& b) { return compare(a, b) == 0; }

/// Resource context Γ. A resource missing from the map is read as emp.
using Context = std::map<std::string, FormulaPtr>;

/// Formula view of a boolean guard.
FormulaPtr bexpr_formula(const BExpr& b);

void collect_free_logical_vars(const Formula& f, std::set<std::string>& out);
FormulaPtr substitute(const FormulaPtr& f, const std::map<std::string, Value>& valuation);

std::string to_string(const Expr& e);
std::string to_string(const BExpr& b);
std::string to_string(const Command& c);
std::string to_string(const Formula& f);

}  // namespace sepgame
