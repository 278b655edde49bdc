#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sepgame/universe.hpp"

namespace sepgame {

/// Atomic machine instruction.
struct Instr {
  enum class Kind { Nop, Assign, Load, Store, Alloc, Dispose, Acquire, Release };

  Kind kind = Kind::Nop;
  std::string name;  // target variable or lock
  ExprPtr e1;
  ExprPtr e2;

  static Instr nop() { return {}; }
  static Instr acquire(std::string r) { return {Kind::Acquire, std::move(r), nullptr, nullptr}; }
  static Instr release(std::string r) { return {Kind::Release, std::move(r), nullptr, nullptr}; }
  /// The instruction of an atomic command (assign, load, store, alloc, dispose, skip).
  static Instr of_command(const Command& c);

  bool is_lock() const { return kind == Kind::Acquire || kind == Kind::Release; }
};

int compare(const Instr& a, const Instr& b);
inline bool operator==(const Instr& a, const Instr& b) { return compare(a, b) == 0; }
inline bool operator<(const Instr& a, const Instr& b) { return compare(a, b) < 0; }

std::string to_string(const Instr& m);
Instr parse_instr(const std::string& text);

/// nullopt is Abort: some variable is not allocated.
std::optional<Value> eval(const Expr& e, const MemoryState& m);
std::optional<bool> eval_bool(const BExpr& b, const MemoryState& m);

struct StepOutcome {
  bool error = false;
  MachineState post;  // equal to the pre-state for errors

  auto operator<=>(const StepOutcome&) const = default;
};

/// Every outcome of executing m in s. Empty means blocked.
std::vector<StepOutcome> machine_step(const MachineState& s, const Instr& m, const Universe& u);

std::set<std::string> locks_plus(const Instr& m);
std::set<std::string> locks_minus(const Instr& m);
std::set<std::string> locks(const Instr& m);

/// Atomic commands among the syntax tree's instructions (no nop/lock).
void collect_instrs(const Command& c, std::vector<Instr>& out);

}  // namespace sepgame
