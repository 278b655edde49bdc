#include "sepgame/ast.hpp"

#include <cctype>

namespace sepgame {

bool is_logical_var(std::string_view name) {
  return !name.empty() && std::isupper(static_cast<unsigned char>(name[0]));
}

namespace {

template <class T>
int cmp3(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

template <class Node>
int compare_ptr(const std::shared_ptr<const Node>& a, const std::shared_ptr<const Node>& b) {
  if (a == b) return 0;
  if (!a) return -1;
  if (!b) return 1;
  return compare(*a, *b);
}

}  // namespace

// ---------------------------------------------------------------- Expr

ExprPtr Expr::lit(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Lit;
  e->value = v;
  return e;
}

ExprPtr Expr::var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::add(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Add;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

ExprPtr Expr::mul(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Mul;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

int compare(const Expr& a, const Expr& b) {
  if (int c = cmp3(a.kind, b.kind)) return c;
  switch (a.kind) {
    case Expr::Kind::Lit:
      return cmp3(a.value, b.value);
    case Expr::Kind::Var:
      return a.name.compare(b.name) < 0 ? -1 : (a.name == b.name ? 0 : 1);
    default:
      if (int c = compare_ptr(a.lhs, b.lhs)) return c;
      return compare_ptr(a.rhs, b.rhs);
  }
}

void collect_program_vars(const Expr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::Lit:
      return;
    case Expr::Kind::Var:
      if (!is_logical_var(e.name)) out.insert(e.name);
      return;
    default:
      collect_program_vars(*e.lhs, out);
      collect_program_vars(*e.rhs, out);
  }
}

void collect_logical_vars(const Expr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::Lit:
      return;
    case Expr::Kind::Var:
      if (is_logical_var(e.name)) out.insert(e.name);
      return;
    default:
      collect_logical_vars(*e.lhs, out);
      collect_logical_vars(*e.rhs, out);
  }
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, Value>& valuation) {
  switch (e->kind) {
    case Expr::Kind::Lit:
      return e;
    case Expr::Kind::Var: {
      auto it = valuation.find(e->name);
      if (it == valuation.end() || !is_logical_var(e->name)) return e;
      return Expr::lit(it->second);
    }
    case Expr::Kind::Add:
      return Expr::add(substitute(e->lhs, valuation), substitute(e->rhs, valuation));
    case Expr::Kind::Mul:
      return Expr::mul(substitute(e->lhs, valuation), substitute(e->rhs, valuation));
  }
  return e;
}

ExprPtr rename_var(const ExprPtr& e, const std::string& from, const std::string& to) {
  switch (e->kind) {
    case Expr::Kind::Lit:
      return e;
    case Expr::Kind::Var:
      return e->name == from ? Expr::var(to) : e;
    case Expr::Kind::Add:
      return Expr::add(rename_var(e->lhs, from, to), rename_var(e->rhs, from, to));
    case Expr::Kind::Mul:
      return Expr::mul(rename_var(e->lhs, from, to), rename_var(e->rhs, from, to));
  }
  return e;
}

// ---------------------------------------------------------------- BExpr

BExprPtr BExpr::truth(bool b) {
  auto e = std::make_shared<BExpr>();
  e->kind = b ? Kind::True : Kind::False;
  return e;
}

BExprPtr BExpr::conj(BExprPtr a, BExprPtr b) {
  auto e = std::make_shared<BExpr>();
  e->kind = Kind::And;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

BExprPtr BExpr::disj(BExprPtr a, BExprPtr b) {
  auto e = std::make_shared<BExpr>();
  e->kind = Kind::Or;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

BExprPtr BExpr::eq(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<BExpr>();
  e->kind = Kind::Eq;
  e->left = std::move(a);
  e->right = std::move(b);
  return e;
}

int compare(const BExpr& a, const BExpr& b) {
  if (int c = cmp3(a.kind, b.kind)) return c;
  if (int c = compare_ptr(a.lhs, b.lhs)) return c;
  if (int c = compare_ptr(a.rhs, b.rhs)) return c;
  if (int c = compare_ptr(a.left, b.left)) return c;
  return compare_ptr(a.right, b.right);
}

void collect_program_vars(const BExpr& b, std::set<std::string>& out) {
  switch (b.kind) {
    case BExpr::Kind::True:
    case BExpr::Kind::False:
      return;
    case BExpr::Kind::Eq:
      collect_program_vars(*b.left, out);
      collect_program_vars(*b.right, out);
      return;
    default:
      collect_program_vars(*b.lhs, out);
      collect_program_vars(*b.rhs, out);
  }
}

// ---------------------------------------------------------------- Command

namespace {

std::shared_ptr<Command> make_command(Command::Kind k) {
  auto c = std::make_shared<Command>();
  c->kind = k;
  return c;
}

}  // namespace

CommandPtr Command::assign(std::string x, ExprPtr e) {
  auto c = make_command(Kind::Assign);
  c->name = std::move(x);
  c->e1 = std::move(e);
  return c;
}

CommandPtr Command::load(std::string x, ExprPtr e) {
  auto c = make_command(Kind::Load);
  c->name = std::move(x);
  c->e1 = std::move(e);
  return c;
}

CommandPtr Command::store(ExprPtr loc, ExprPtr e) {
  auto c = make_command(Kind::Store);
  c->e1 = std::move(loc);
  c->e2 = std::move(e);
  return c;
}

CommandPtr Command::seq(CommandPtr a, CommandPtr b) {
  auto c = make_command(Kind::Seq);
  c->c1 = std::move(a);
  c->c2 = std::move(b);
  return c;
}

CommandPtr Command::par(CommandPtr a, CommandPtr b) {
  auto c = make_command(Kind::Par);
  c->c1 = std::move(a);
  c->c2 = std::move(b);
  return c;
}

CommandPtr Command::skip() { return make_command(Kind::Skip); }

CommandPtr Command::loop(BExprPtr b, CommandPtr body) {
  auto c = make_command(Kind::While);
  c->cond = std::move(b);
  c->c1 = std::move(body);
  return c;
}

CommandPtr Command::resource(std::string r, CommandPtr body) {
  auto c = make_command(Kind::Resource);
  c->name = std::move(r);
  c->c1 = std::move(body);
  return c;
}

CommandPtr Command::with(std::string r, BExprPtr b, CommandPtr body) {
  auto c = make_command(Kind::With);
  c->name = std::move(r);
  c->cond = std::move(b);
  c->c1 = std::move(body);
  return c;
}

CommandPtr Command::ite(BExprPtr b, CommandPtr then_c, CommandPtr else_c) {
  auto c = make_command(Kind::If);
  c->cond = std::move(b);
  c->c1 = std::move(then_c);
  c->c2 = std::move(else_c);
  return c;
}

CommandPtr Command::alloc(std::string x, ExprPtr e) {
  auto c = make_command(Kind::Alloc);
  c->name = std::move(x);
  c->e1 = std::move(e);
  return c;
}

CommandPtr Command::dispose(ExprPtr e) {
  auto c = make_command(Kind::Dispose);
  c->e1 = std::move(e);
  return c;
}

int compare(const Command& a, const Command& b) {
  if (int c = cmp3(a.kind, b.kind)) return c;
  if (int c = cmp3(a.name, b.name)) return c;
  if (int c = compare_ptr(a.e1, b.e1)) return c;
  if (int c = compare_ptr(a.e2, b.e2)) return c;
  if (int c = compare_ptr(a.cond, b.cond)) return c;
  if (int c = compare_ptr(a.c1, b.c1)) return c;
  return compare_ptr(a.c2, b.c2);
}

// ---------------------------------------------------------------- Formula

namespace {

std::shared_ptr<Formula> make_formula(Formula::Kind k) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  return f;
}

FormulaPtr binary(Formula::Kind k, FormulaPtr a, FormulaPtr b) {
  auto f = make_formula(k);
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

}  // namespace

FormulaPtr Formula::emp() { return make_formula(Kind::Emp); }
FormulaPtr Formula::truth(bool b) { return make_formula(b ? Kind::True : Kind::False); }
FormulaPtr Formula::disj(FormulaPtr a, FormulaPtr b) { return binary(Kind::Or, std::move(a), std::move(b)); }
FormulaPtr Formula::conj(FormulaPtr a, FormulaPtr b) { return binary(Kind::And, std::move(a), std::move(b)); }
FormulaPtr Formula::star(FormulaPtr a, FormulaPtr b) { return binary(Kind::Star, std::move(a), std::move(b)); }
FormulaPtr Formula::implies(FormulaPtr a, FormulaPtr b) {
  return binary(Kind::Implies, std::move(a), std::move(b));
}

FormulaPtr Formula::negate(FormulaPtr a) {
  auto f = make_formula(Kind::Not);
  f->lhs = std::move(a);
  return f;
}

FormulaPtr Formula::forall(std::string x, FormulaPtr body) {
  auto f = make_formula(Kind::Forall);
  f->name = std::move(x);
  f->lhs = std::move(body);
  return f;
}

FormulaPtr Formula::exists(std::string x, FormulaPtr body) {
  auto f = make_formula(Kind::Exists);
  f->name = std::move(x);
  f->lhs = std::move(body);
  return f;
}

FormulaPtr Formula::own(Perm p, std::string x) {
  auto f = make_formula(Kind::Own);
  f->perm = p;
  f->name = std::move(x);
  return f;
}

FormulaPtr Formula::own_any(std::string x) {
  auto f = make_formula(Kind::OwnAny);
  f->name = std::move(x);
  return f;
}

FormulaPtr Formula::points_to(ExprPtr loc, Perm p, ExprPtr value) {
  auto f = make_formula(Kind::PointsTo);
  f->e1 = std::move(loc);
  f->perm = p;
  f->e2 = std::move(value);
  return f;
}

FormulaPtr Formula::eq(ExprPtr a, ExprPtr b) {
  auto f = make_formula(Kind::Eq);
  f->e1 = std::move(a);
  f->e2 = std::move(b);
  return f;
}

int compare(const Formula& a, const Formula& b) {
  if (int c = cmp3(a.kind, b.kind)) return c;
  if (int c = cmp3(a.name, b.name)) return c;
  if (int c = cmp3(a.perm, b.perm)) return c;
  if (int c = compare_ptr(a.e1, b.e1)) return c;
  if (int c = compare_ptr(a.e2, b.e2)) return c;
  if (int c = compare_ptr(a.lhs, b.lhs)) return c;
  return compare_ptr(a.rhs, b.rhs);
}

FormulaPtr bexpr_formula(const BExpr& b) {
  switch (b.kind) {
    case BExpr::Kind::True:
      return Formula::truth(true);
    case BExpr::Kind::False:
      return Formula::truth(false);
    case BExpr::Kind::And:
      return Formula::conj(bexpr_formula(*b.lhs), bexpr_formula(*b.rhs));
    case BExpr::Kind::Or:
      return Formula::disj(bexpr_formula(*b.lhs), bexpr_formula(*b.rhs));
    case BExpr::Kind::Eq:
      return Formula::eq(b.left, b.right);
  }
  return Formula::truth(true);
}

namespace {

void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  auto from_expr = [&](const ExprPtr& e) {
    if (!e) return;
    std::set<std::string> vs;
    collect_logical_vars(*e, vs);
    for (const auto& v : vs)
      if (!bound.count(v)) out.insert(v);
  };
  switch (f.kind) {
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      const bool fresh = bound.insert(f.name).second;
      collect_free(*f.lhs, bound, out);
      if (fresh) bound.erase(f.name);
      return;
    }
    default:
      from_expr(f.e1);
      from_expr(f.e2);
      if (f.lhs) collect_free(*f.lhs, bound, out);
      if (f.rhs) collect_free(*f.rhs, bound, out);
  }
}

}  // namespace

void collect_free_logical_vars(const Formula& f, std::set<std::string>& out) {
  std::set<std::string> bound;
  collect_free(f, bound, out);
}

FormulaPtr substitute(const FormulaPtr& f, const std::map<std::string, Value>& valuation) {
  if (valuation.empty()) return f;
  auto copy = std::make_shared<Formula>(*f);
  if (f->kind == Formula::Kind::Forall || f->kind == Formula::Kind::Exists) {
    if (valuation.count(f->name)) {
      auto inner = valuation;
      inner.erase(f->name);
      copy->lhs = substitute(f->lhs, inner);
      return copy;
    }
  }
  if (f->e1) copy->e1 = substitute(f->e1, valuation);
  if (f->e2) copy->e2 = substitute(f->e2, valuation);
  if (f->lhs) copy->lhs = substitute(f->lhs, valuation);
  if (f->rhs) copy->rhs = substitute(f->rhs, valuation);
  return copy;
}

// ---------------------------------------------------------------- printing

namespace {

std::string expr_operand(const Expr& e, bool right_of_add) {
  if (right_of_add && e.kind == Expr::Kind::Add) return "(" + to_string(e) + ")";
  return to_string(e);
}

}  // namespace

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Lit:
      return std::to_string(e.value);
    case Expr::Kind::Var:
      return e.name;
    case Expr::Kind::Add:
      return to_string(*e.lhs) + " + " + expr_operand(*e.rhs, true);
    case Expr::Kind::Mul: {
      auto side = [](const Expr& x) {
        return x.kind == Expr::Kind::Add ? "(" + to_string(x) + ")" : to_string(x);
      };
      // products are always bracketed so that formulas can use `*` for the tensor
      return "(" + side(*e.lhs) + " * " + side(*e.rhs) + ")";
    }
  }
  return {};
}

std::string to_string(const BExpr& b) {
  auto paren = [](const BExpr& x, bool need) {
    return need ? "(" + to_string(x) + ")" : to_string(x);
  };
  switch (b.kind) {
    case BExpr::Kind::True:
      return "true";
    case BExpr::Kind::False:
      return "false";
    case BExpr::Kind::Eq:
      return to_string(*b.left) + " = " + to_string(*b.right);
    case BExpr::Kind::And:
      return paren(*b.lhs, b.lhs->kind == BExpr::Kind::Or) + " /\\ " +
             paren(*b.rhs, b.rhs->kind == BExpr::Kind::Or || b.rhs->kind == BExpr::Kind::And);
    case BExpr::Kind::Or:
      return to_string(*b.lhs) + " \\/ " + paren(*b.rhs, b.rhs->kind == BExpr::Kind::Or);
  }
  return {};
}

namespace {

std::string body_string(const Command& c) {
  if (c.kind == Command::Kind::Seq || c.kind == Command::Kind::Par) return "{ " + to_string(c) + " }";
  return to_string(c);
}

}  // namespace

std::string to_string(const Command& c) {
  switch (c.kind) {
    case Command::Kind::Assign:
      return c.name + " := " + to_string(*c.e1);
    case Command::Kind::Load:
      return c.name + " := [" + to_string(*c.e1) + "]";
    case Command::Kind::Store:
      return "[" + to_string(*c.e1) + "] := " + to_string(*c.e2);
    case Command::Kind::Skip:
      return "skip";
    case Command::Kind::Alloc:
      return c.name + " := alloc(" + to_string(*c.e1) + ")";
    case Command::Kind::Dispose:
      return "dispose(" + to_string(*c.e1) + ")";
    case Command::Kind::Seq: {
      std::string l = body_string(*c.c1);
      std::string r = c.c2->kind == Command::Kind::Par ? "{ " + to_string(*c.c2) + " }" : to_string(*c.c2);
      return l + "; " + r;
    }
    case Command::Kind::Par: {
      std::string l = c.c1->kind == Command::Kind::Par ? "{ " + to_string(*c.c1) + " }" : to_string(*c.c1);
      return l + " || " + to_string(*c.c2);
    }
    case Command::Kind::While:
      return "while " + to_string(*c.cond) + " do " + body_string(*c.c1);
    case Command::Kind::Resource:
      return "resource " + c.name + " do " + body_string(*c.c1);
    case Command::Kind::With:
      return "with " + c.name + " when " + to_string(*c.cond) + " do " + body_string(*c.c1);
    case Command::Kind::If:
      return "if " + to_string(*c.cond) + " then " + body_string(*c.c1) + " else " + body_string(*c.c2);
  }
  return {};
}

namespace {

int formula_prec(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Implies:
      return 0;
    case Formula::Kind::Or:
      return 1;
    case Formula::Kind::And:
      return 2;
    case Formula::Kind::Star:
      return 3;
    case Formula::Kind::Not:
      return 4;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return -1;  // extends as far right as possible
    default:
      return 5;
  }
}

std::string operand(const Formula& f, bool need) { return need ? "(" + to_string(f) + ")" : to_string(f); }

}  // namespace

std::string to_string(const Formula& f) {
  const int p = formula_prec(f);
  auto bin = [&](const char* op) {
    const int lp = formula_prec(*f.lhs);
    const int rp = formula_prec(*f.rhs);
    if (f.kind == Formula::Kind::Implies)
      return operand(*f.lhs, lp <= p) + op + operand(*f.rhs, rp < 0 ? false : rp < p);
    return operand(*f.lhs, lp < p) + op + operand(*f.rhs, rp <= p);
  };
  switch (f.kind) {
    case Formula::Kind::Emp:
      return "emp";
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::False:
      return "false";
    case Formula::Kind::Or:
      return bin(" \\/ ");
    case Formula::Kind::And:
      return bin(" /\\ ");
    case Formula::Kind::Star:
      return bin(" * ");
    case Formula::Kind::Implies:
      return bin(" => ");
    case Formula::Kind::Not:
      return "~" + operand(*f.lhs, formula_prec(*f.lhs) < 4);
    case Formula::Kind::Forall:
      return "forall " + f.name + ". " + to_string(*f.lhs);
    case Formula::Kind::Exists:
      return "exists " + f.name + ". " + to_string(*f.lhs);
    case Formula::Kind::Own:
      return "own_" + f.perm.str() + "(" + f.name + ")";
    case Formula::Kind::OwnAny:
      return "own_*(" + f.name + ")";
    case Formula::Kind::PointsTo: {
      std::string arrow = f.perm.is_full() ? " |-> " : " |->_" + f.perm.str() + " ";
      return to_string(*f.e1) + arrow + to_string(*f.e2);
    }
    case Formula::Kind::Eq:
      return to_string(*f.e1) + " = " + to_string(*f.e2);
  }
  return {};
}

}  // namespace sepgame
