#pragma once
// Small random generators shared by the property tests.

#include <random>
#include <string>
#include <vector>

#include "sepgame/traces.hpp"

namespace gen {

using namespace sepgame;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(eng_); }
  bool coin() { return below(2) == 0; }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(below(static_cast<int>(xs.size())))];
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline ExprPtr expr(Rng& r, int depth, bool logical) {
  static const std::vector<std::string> pvars = {"x", "y", "z"};
  static const std::vector<std::string> lvars = {"X", "Y"};
  if (depth == 0 || r.below(3) == 0) {
    switch (r.below(logical ? 3 : 2)) {
      case 0:
        return Expr::lit(r.below(5) - 1);
      case 1:
        return Expr::var(r.pick(pvars));
      default:
        return Expr::var(r.pick(lvars));
    }
  }
  auto a = expr(r, depth - 1, logical);
  auto b = expr(r, depth - 1, logical);
  return r.coin() ? Expr::add(a, b) : Expr::mul(a, b);
}

inline BExprPtr bexpr(Rng& r, int depth) {
  if (depth == 0 || r.below(3) == 0) {
    switch (r.below(4)) {
      case 0:
        return BExpr::truth(r.coin());
      default:
        return BExpr::eq(expr(r, 1, false), expr(r, 1, false));
    }
  }
  auto a = bexpr(r, depth - 1);
  auto b = bexpr(r, depth - 1);
  return r.coin() ? BExpr::conj(a, b) : BExpr::disj(a, b);
}

inline CommandPtr command(Rng& r, int depth) {
  static const std::vector<std::string> vars = {"x", "y", "z"};
  static const std::vector<std::string> locks = {"r", "q"};
  if (depth == 0 || r.below(4) == 0) {
    switch (r.below(6)) {
      case 0:
        return Command::assign(r.pick(vars), expr(r, 1, false));
      case 1:
        return Command::load(r.pick(vars), expr(r, 1, false));
      case 2:
        return Command::store(expr(r, 1, false), expr(r, 1, false));
      case 3:
        return Command::alloc(r.pick(vars), expr(r, 1, false));
      case 4:
        return Command::dispose(expr(r, 1, false));
      default:
        return Command::skip();
    }
  }
  switch (r.below(6)) {
    case 0:
      return Command::seq(command(r, depth - 1), command(r, depth - 1));
    case 1:
      return Command::par(command(r, depth - 1), command(r, depth - 1));
    case 2:
      return Command::loop(bexpr(r, 1), command(r, depth - 1));
    case 3:
      return Command::resource(r.pick(locks), command(r, depth - 1));
    case 4:
      return Command::with(r.pick(locks), bexpr(r, 1), command(r, depth - 1));
    default:
      return Command::ite(bexpr(r, 1), command(r, depth - 1), command(r, depth - 1));
  }
}

inline FormulaPtr formula(Rng& r, int depth) {
  static const std::vector<std::string> vars = {"x", "y"};
  static const std::vector<std::string> lvars = {"X", "Y"};
  const Perm half = *Perm::make(1, 2);
  if (depth == 0 || r.below(4) == 0) {
    switch (r.below(7)) {
      case 0:
        return Formula::emp();
      case 1:
        return Formula::truth(r.coin());
      case 2:
        return Formula::own(r.coin() ? Perm::full() : half, r.pick(vars));
      case 3:
        return Formula::own_any(r.pick(vars));
      case 4:
        return Formula::points_to(expr(r, 1, true), r.coin() ? Perm::full() : half, expr(r, 1, true));
      default:
        return Formula::eq(expr(r, 1, true), expr(r, 1, true));
    }
  }
  switch (r.below(7)) {
    case 0:
      return Formula::disj(formula(r, depth - 1), formula(r, depth - 1));
    case 1:
      return Formula::conj(formula(r, depth - 1), formula(r, depth - 1));
    case 2:
      return Formula::star(formula(r, depth - 1), formula(r, depth - 1));
    case 3:
      return Formula::implies(formula(r, depth - 1), formula(r, depth - 1));
    case 4:
      return Formula::negate(formula(r, depth - 1));
    case 5:
      return Formula::forall(r.pick(lvars), formula(r, depth - 1));
    default:
      return Formula::exists(r.pick(lvars), formula(r, depth - 1));
  }
}

inline MachineState machine_state(Rng& r) {
  MachineState m;
  for (const char* x : {"x", "y"})
    if (r.below(3)) m.mem.stack[x] = r.below(3);
  if (r.coin()) m.mem.heap[100] = r.below(3);
  for (const char* l : {"r", "q"})
    if (r.below(3) == 0) m.locked.insert(l);
  return m;
}

inline Instr instr(Rng& r) {
  switch (r.below(6)) {
    case 0:
      return Instr::nop();
    case 1:
      return Instr::acquire(r.coin() ? "r" : "q");
    case 2:
      return Instr::release(r.coin() ? "r" : "q");
    default:
      return Instr::of_command(*command(r, 0));
  }
}

/// Structurally arbitrary trace (steps need not be machine steps); an error
/// step can only come last.
inline Trace trace(Rng& r, std::size_t max_len) {
  Trace t{machine_state(r), {}, machine_state(r)};
  const std::size_t n = static_cast<std::size_t>(r.below(static_cast<int>(max_len) + 1));
  for (std::size_t k = 0; k < n; ++k) {
    CodeTransition c{machine_state(r), instr(r), machine_state(r), false};
    if (k + 1 == n && r.below(5) == 0) {
      c.error = true;
      c.post = c.pre;
    }
    t.steps.push_back(std::move(c));
  }
  return t;
}

inline std::vector<std::size_t> increasing_map(Rng& r, std::size_t q) {
  std::vector<std::size_t> f;
  for (std::size_t k = 1; k <= q; ++k)
    if (r.coin()) f.push_back(k);
  return f;
}

}  // namespace gen
