#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sepgame/universe.hpp"

namespace sepgame {

using Valuation = std::map<std::string, Value>;

class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Program variables come from the stack, logical ones from the valuation.
/// Throws LogicError for a logical variable the valuation does not cover.
std::optional<Value> eval_logical(const Expr& e, const MemoryState& m, const Valuation& rho);

/// Every (σ1, σ2) with σ1 ∗ σ2 = σ, where shared keys split into permissions
/// of the given set.
std::vector<std::pair<LogicalState, LogicalState>> substates(const LogicalState& s, const std::vector<Perm>& perms);

/// σ ⊨ P under ρ. Expressions inside P read program variables from the state
/// being judged at the top level, also below a separating conjunction.
bool satisfies(const LogicalState& s, const Formula& f, const Valuation& rho, const Universe& u);
/// Same, with program variables read from `ambient` instead of s.
bool satisfies_in(const MemoryState& ambient, const LogicalState& s, const Formula& f, const Valuation& rho,
                  const Universe& u);

/// Values quantifiers range over: the declared range plus the locations.
std::vector<Value> value_domain(const Universe& u);

/// The logical states used to decide precision and entailment: every state
/// over the variables and locations the formulas mention, plus one spare
/// variable and one spare location when the universe has them.
std::vector<LogicalState> scope_states(const std::vector<const Formula*>& fs, const Universe& u);

/// For every enumerable σ, at most one substate of σ satisfies P.
bool is_precise(const Formula& p, const Universe& u);

/// For every enumerable σ and valuation of the free logical variables,
/// σ ⊨ P implies σ ⊨ Q.
bool entails(const Formula& p, const Formula& q, const Universe& u);

/// own_*(x) for each program variable of B; `true` when there are none.
FormulaPtr def_formula(const BExpr& b);

/// Every valuation of the given logical variables over the value domain.
std::vector<Valuation> valuations(const std::set<std::string>& vars, const Universe& u);

}  // namespace sepgame
