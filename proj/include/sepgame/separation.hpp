#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sepgame/machine.hpp"

namespace sepgame {

struct ResourceSlot {
  enum class Kind { Available, HeldByCode, HeldByFrame };
  Kind kind = Kind::Available;
  LogicalState state;  // only meaningful when Available

  static ResourceSlot available(LogicalState s) { return {Kind::Available, std::move(s)}; }
  static ResourceSlot code() { return {Kind::HeldByCode, {}}; }
  static ResourceSlot frame() { return {Kind::HeldByFrame, {}}; }

  auto operator<=>(const ResourceSlot&) const = default;
};

/// (σ_C, σ̄, σ_F). The map's keys are the resource alphabet.
struct SeparatedState {
  LogicalState code;
  std::map<std::string, ResourceSlot> resources;
  LogicalState frame;

  std::set<std::string> dom() const;
  std::set<std::string> dom_code() const;
  std::set<std::string> dom_frame() const;

  auto operator<=>(const SeparatedState&) const = default;
};

/// σ_C ∗ (∗ available σ̄(r)) ∗ σ_F, when defined.
std::optional<LogicalState> big_tensor(const SeparatedState& s);
bool well_formed(const SeparatedState& s);

/// Throws std::invalid_argument when the big tensor is undefined.
MachineState combine(const SeparatedState& s);

bool legal_eve_move(const SeparatedState& s, const Instr& m, const SeparatedState& next, const Universe& u);
bool legal_adam_move(const SeparatedState& s, const SeparatedState& next);

/// Diagnostic only: the big tensor keeps every permission between the two
/// states (same keys, same total permission per key).
bool permission_conserving(const SeparatedState& s, const SeparatedState& next);

/// All legal Eve moves from s labelled m that combine into `target`.
std::vector<SeparatedState> enumerate_eve_moves(const SeparatedState& s, const Instr& m, const MachineState& target,
                                                const Universe& u);

/// All legal Adam moves from s that combine into `target`.
std::vector<SeparatedState> enumerate_adam_moves(const SeparatedState& s, const MachineState& target,
                                                 const Universe& u);

/// All separated states over the alphabet that combine into `target`.
std::vector<SeparatedState> enumerate_separations(const MachineState& target, const std::set<std::string>& alphabet,
                                                  const Universe& u);

/// The ways of giving `parties` fresh logical states so that, together with
/// the fixed parts, the tensor is defined and forgets to `target`. Each
/// permission handed out comes from the universe's set.
std::vector<std::vector<LogicalState>> completions(const MemoryState& target,
                                                   const std::vector<const LogicalState*>& fixed,
                                                   std::size_t parties, const std::vector<Perm>& perms);

std::string to_string(const ResourceSlot& r);
/// `C s{..} h{..} | r:avail s{..} h{..}, q:code | F s{..} h{..}`
std::string to_string(const SeparatedState& s);

}  // namespace sepgame
