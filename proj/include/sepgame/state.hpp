#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "sepgame/ast.hpp"

namespace sepgame {

struct MemoryState {
  std::map<std::string, Value> stack;
  std::map<Value, Value> heap;

  auto operator<=>(const MemoryState&) const = default;
};

struct MachineState {
  MemoryState mem;
  std::set<std::string> locked;

  auto operator<=>(const MachineState&) const = default;
};

struct Cell {
  Value value = 0;
  Perm perm;

  auto operator<=>(const Cell& o) const {
    if (auto c = value <=> o.value; c != 0) return c;
    return perm <=> o.perm;
  }
  bool operator==(const Cell&) const = default;
};

/// Memory where every variable and location carries a permission.
struct LogicalState {
  std::map<std::string, Cell> stack;
  std::map<Value, Cell> heap;

  bool empty() const { return stack.empty() && heap.empty(); }
  auto operator<=>(const LogicalState&) const = default;
};

/// σ1 ∗ σ2. Shared keys must agree on the value and have summable permissions.
std::optional<LogicalState> tensor(const LogicalState& a, const LogicalState& b);

/// Forget permissions.
MemoryState erase(const LogicalState& s);

std::string to_string(const MemoryState& m);
std::string to_string(const MachineState& m);
std::string to_string(const LogicalState& s);

// Inverse of the printers above. Throw ParseError on malformed text.
MachineState parse_machine_state(const std::string& text);
LogicalState parse_logical_state(const std::string& text);

}  // namespace sepgame
