#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sepgame/logic.hpp"
#include "sepgame/separation.hpp"
#include "sepgame/traces.hpp"

namespace sepgame {

/// (P, Γ, Q): the code part satisfies P, the frame Q, available resources Γ.
struct SeparatedPredicate {
  FormulaPtr pre;
  Context ctx;
  FormulaPtr post;
};

/// SGame(t) together with its winning condition.
struct Game {
  Trace trace;
  bool returning = false;
  FormulaPtr pre;
  FormulaPtr post;
  Context ctx;
  Valuation rho;
  std::set<std::string> alphabet;

  std::size_t length() const { return trace.length(); }
  std::size_t positions() const { return 2 * trace.length() + 2; }
  /// Machine state at position i in 1..positions().
  const MachineState& state_at(std::size_t i) const;
  SeparatedPredicate predicate_at(std::size_t i) const;
};

/// Alphabet: the resources of Γ and every lock the trace mentions.
Game make_game(FormulaPtr pre, Context ctx, FormulaPtr post, Trace t, bool returning, Valuation rho = {});

std::vector<SeparatedPredicate> winning_spec(const FormulaPtr& pre, const Context& ctx, const FormulaPtr& post,
                                             const Trace& t, bool returning);

bool sat_sep(const SeparatedState& s, const SeparatedPredicate& sp, const Valuation& rho, const Universe& u);

/// The play is the sequence of visited states x_1, x_2, ...; it combines into
/// a prefix of the trace and every state satisfies its predicate.
bool is_winning_play(const std::vector<SeparatedState>& play, const Game& g, const Universe& u);

struct StrategyNode {
  virtual ~StrategyNode() = default;
  /// Two nodes with equal keys answer every question identically.
  virtual std::string key() const = 0;
};
using NodePtr = std::shared_ptr<const StrategyNode>;

struct EveMove {
  SeparatedState state;
  NodePtr node;
};

/// A prefix-closed set of plays, unfolded on demand. The play ending with an
/// Adam move is in the strategy exactly when it is winning; what the strategy
/// decides is where plays start and how Eve answers.
class Strategy {
 public:
  virtual ~Strategy() = default;
  /// nullptr when the empty play at x is not in the strategy.
  virtual NodePtr start(const SeparatedState& x) const = 0;
  /// Eve's answers after Adam moved to x at position 2j.
  virtual std::vector<EveMove> respond(const NodePtr& at, const SeparatedState& x, std::size_t j) const = 0;
};

enum class Verdict { Pass, Fail, Unknown };
std::string to_string(Verdict v);

struct CheckOptions {
  std::size_t max_nodes = 4'000'000;
};

struct CheckResult {
  Verdict verdict = Verdict::Pass;
  std::string reason;
  std::vector<SeparatedState> play;  // counterexample
  std::size_t nodes = 0;
};

CheckResult check_winning_strategy(const Strategy& strat, const Game& g, const Universe& u, CheckOptions opts = {});

struct SolveResult {
  Verdict verdict = Verdict::Pass;  // Fail: no winning strategy exists
  std::shared_ptr<const Strategy> strategy;
  std::vector<SeparatedState> play;  // a losing initial state on Fail
  std::size_t nodes = 0;
};

/// Backward induction over the positions of SGame(t). The returned strategy
/// is the largest winning one: every Eve answer from which she still wins.
SolveResult solve_eve(const Game& g, const Universe& u, CheckOptions opts = {});

/// One line per position: polarity, instruction or env, state, predicate
/// index and whether the state satisfies it.
std::string format_play(const std::vector<SeparatedState>& play, const Game& g, const Universe& u);

}  // namespace sepgame
