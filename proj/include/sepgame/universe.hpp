#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sepgame/state.hpp"

namespace sepgame {

enum class EnvPolicy { Passive, Moves, Exhaustive };

/// One interference step available to the environment under EnvPolicy::Moves.
struct EnvMove {
  enum class Kind { Assign, Store, Acquire, Release };
  Kind kind = Kind::Assign;
  std::string name;  // variable or lock
  Value loc = 0;
  Value value = 0;

  auto operator<=>(const EnvMove&) const = default;
};

std::string to_string(const EnvMove& m);

/// Applies the move if it is enabled in `s`.
std::optional<MachineState> apply_env_move(const MachineState& s, const EnvMove& m);

struct Universe {
  std::vector<std::string> vars;
  std::vector<Value> locs;
  Value lo = 0;
  Value hi = 0;
  std::vector<Perm> perms;
  std::vector<std::string> locks;
  std::size_t maxlen = 4;
  EnvPolicy env = EnvPolicy::Passive;
  std::vector<EnvMove> env_moves;
  std::vector<LogicalState> inits;

  std::vector<Value> values() const;
  /// Values a program may store: the range plus the location names.
  bool writable(Value v) const;
  bool is_loc(Value v) const;
  std::string describe() const;
};

Universe parse_universe(const std::string& text);

/// All machine states over the universe (every partial stack, partial heap
/// over the locations, every lock set). Exponential; tiny universes only.
std::vector<MachineState> all_machine_states(const Universe& u);

/// All logical states over the universe.
std::vector<LogicalState> all_logical_states(const Universe& u);

}  // namespace sepgame
