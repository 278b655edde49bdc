#include "sepgame/game.hpp"

#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace sepgame {

const MachineState& Game::state_at(std::size_t i) const {
  if (i < 1 || i > positions()) throw std::out_of_range("position " + std::to_string(i));
  if (i == 1) return trace.source;
  if (i == positions()) return trace.target;
  const auto& step = trace.steps[(i - 2) / 2];
  return i % 2 == 0 ? step.pre : step.post;
}

SeparatedPredicate Game::predicate_at(std::size_t i) const {
  if (i == 1) return {pre, ctx, Formula::truth(true)};
  if (i == positions() && returning) return {post, ctx, Formula::truth(true)};
  return {Formula::truth(true), ctx, Formula::truth(true)};
}

Game make_game(FormulaPtr pre, Context ctx, FormulaPtr post, Trace t, bool returning, Valuation rho) {
  Game g;
  for (const auto& [r, j] : ctx) g.alphabet.insert(r);
  auto add = [&](const MachineState& s) { g.alphabet.insert(s.locked.begin(), s.locked.end()); };
  add(t.source);
  add(t.target);
  for (const auto& s : t.steps) {
    add(s.pre);
    add(s.post);
    for (const auto& r : locks(s.instr)) g.alphabet.insert(r);
  }
  g.trace = std::move(t);
  g.returning = returning;
  g.pre = std::move(pre);
  g.post = std::move(post);
  g.ctx = std::move(ctx);
  g.rho = std::move(rho);
  return g;
}

std::vector<SeparatedPredicate> winning_spec(const FormulaPtr& pre, const Context& ctx, const FormulaPtr& post,
                                             const Trace& t, bool returning) {
  Game g = make_game(pre, ctx, post, t, returning);
  std::vector<SeparatedPredicate> out;
  for (std::size_t i = 1; i <= g.positions(); ++i) out.push_back(g.predicate_at(i));
  return out;
}

bool sat_sep(const SeparatedState& s, const SeparatedPredicate& sp, const Valuation& rho, const Universe& u) {
  if (!satisfies(s.code, *sp.pre, rho, u) || !satisfies(s.frame, *sp.post, rho, u)) return false;
  for (const auto& [r, slot] : s.resources) {
    if (slot.kind != ResourceSlot::Kind::Available) continue;
    auto it = sp.ctx.find(r);
    if (it == sp.ctx.end()) {
      if (!slot.state.empty()) return false;
    } else if (!satisfies(slot.state, *it->second, rho, u)) {
      return false;
    }
  }
  return true;
}

bool is_winning_play(const std::vector<SeparatedState>& play, const Game& g, const Universe& u) {
  if (play.size() > g.positions()) return false;
  for (std::size_t i = 0; i < play.size(); ++i) {
    const auto& x = play[i];
    if (!well_formed(x) || combine(x) != g.state_at(i + 1)) return false;
    if (i > 0) {
      const bool eve = (i + 1) % 2 == 1;
      const bool legal =
          eve ? legal_eve_move(play[i - 1], g.trace.steps[i / 2 - 1].instr, x, u) : legal_adam_move(play[i - 1], x);
      if (!legal) return false;
    }
    if (!sat_sep(x, g.predicate_at(i + 1), g.rho, u)) return false;
  }
  return true;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Unknown:
      return "unknown";
  }
  return "?";
}

namespace {

// Winning Adam moves into position 2j, cached on what they depend on.
class AdamMoves {
 public:
  AdamMoves(const Game& g, const Universe& u) : g_(g), u_(u) {}

  const std::vector<SeparatedState>& at(const SeparatedState& x, std::size_t j) {
    std::string key = std::to_string(j) + "|" + to_string(x.code) + "|";
    for (const auto& r : x.dom_code()) key += r + ",";
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<SeparatedState> keep;
    const auto pred = g_.predicate_at(2 * j);
    for (auto& a : enumerate_adam_moves(x, g_.state_at(2 * j), u_))
      if (sat_sep(a, pred, g_.rho, u_)) keep.push_back(std::move(a));
    return cache_.emplace(std::move(key), std::move(keep)).first->second;
  }

  // Position 2p+1 of a returning trace: if Adam can close the play while
  // keeping Γ, the code part must satisfy Q. Adam never touches σ_C, so
  // this is the only way Q binds.
  bool closing_ok(const SeparatedState& x) {
    if (!g_.returning || satisfies(x.code, *g_.post, g_.rho, u_)) return true;
    const SeparatedPredicate keep{Formula::truth(true), g_.ctx, Formula::truth(true)};
    for (const auto& a : enumerate_adam_moves(x, g_.state_at(g_.positions()), u_))
      if (sat_sep(a, keep, g_.rho, u_)) return false;
    return true;
  }

 private:
  const Game& g_;
  const Universe& u_;
  std::unordered_map<std::string, std::vector<SeparatedState>> cache_;
};

class Checker {
 public:
  Checker(const Strategy& s, const Game& g, const Universe& u, CheckOptions o)
      : strat_(s), g_(g), u_(u), opts_(o), adam_(g, u) {}

  CheckResult run() {
    for (const auto& x : enumerate_separations(g_.state_at(1), g_.alphabet, u_)) {
      const bool winning = sat_sep(x, g_.predicate_at(1), g_.rho, u_);
      NodePtr n = strat_.start(x);
      if (winning && !n) return fail("an empty winning play is missing from the strategy", {x});
      if (!winning && n) return fail("the strategy starts from a losing state", {x});
      if (!n) continue;
      play_ = {x};
      if (!visit(n, x, 1)) return result_;
    }
    result_.nodes = seen_.size();
    return result_;
  }

 private:
  CheckResult fail(std::string why, std::vector<SeparatedState> play) {
    result_.verdict = Verdict::Fail;
    result_.reason = std::move(why);
    result_.play = std::move(play);
    result_.nodes = seen_.size();
    return result_;
  }

  // x sits at position 2j-1; false stops the search
  bool visit(const NodePtr& n, const SeparatedState& x, std::size_t j) {
    if (!seen_.insert(std::to_string(j) + "|" + n->key() + "|" + to_string(x)).second) return true;
    if (seen_.size() > opts_.max_nodes) {
      result_.verdict = Verdict::Unknown;
      result_.reason = "node budget exhausted";
      result_.nodes = seen_.size();
      return false;
    }
    if (j == g_.length() + 1) {
      if (adam_.closing_ok(x)) return true;
      fail("the code part misses the postcondition at the end", play_);
      return false;
    }
    const auto& step = g_.trace.steps[j - 1];
    const auto& target = g_.state_at(2 * j + 1);
    const auto pred = g_.predicate_at(2 * j + 1);
    for (const auto& a : adam_.at(x, j)) {
      play_.push_back(a);
      auto answers = strat_.respond(n, a, j);
      if (answers.empty()) {
        fail("no Eve answer to a winning Adam move", play_);
        return false;
      }
      for (const auto& e : answers) {
        play_.push_back(e.state);
        if (!well_formed(e.state) || combine(e.state) != target || !legal_eve_move(a, step.instr, e.state, u_)) {
          fail("illegal Eve move", play_);
          return false;
        }
        if (!sat_sep(e.state, pred, g_.rho, u_)) {
          fail("Eve move breaks the winning condition", play_);
          return false;
        }
        if (!visit(e.node, e.state, j + 1)) return false;
        play_.pop_back();
      }
      play_.pop_back();
    }
    return true;
  }

  const Strategy& strat_;
  const Game& g_;
  const Universe& u_;
  CheckOptions opts_;
  AdamMoves adam_;
  std::unordered_set<std::string> seen_;
  std::vector<SeparatedState> play_;
  CheckResult result_;
};

struct PositionalNode : StrategyNode {
  std::string key() const override { return ""; }
};

// Shared between the solver run and the strategy it hands out.
class Solver {
 public:
  Solver(Game g, const Universe& u, CheckOptions o) : g_(std::move(g)), u_(u), opts_(o), adam_(g_, u_) {}

  // Eve wins from x at position 2j-1
  bool wins(const SeparatedState& x, std::size_t j) {
    if (j == g_.length() + 1) return adam_.closing_ok(x);
    const std::string key = std::to_string(j) + "|" + to_string(x);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    if (memo_.size() > opts_.max_nodes) {
      exhausted_ = true;
      return false;
    }
    bool ok = true;
    for (const auto& a : adam_.at(x, j)) {
      if (answers(a, j, true).empty()) {
        ok = false;
        break;
      }
    }
    memo_[key] = ok;
    return ok;
  }

  std::vector<SeparatedState> answers(const SeparatedState& a, std::size_t j, bool first_only) {
    const auto& step = g_.trace.steps[j - 1];
    const auto pred = g_.predicate_at(2 * j + 1);
    std::vector<SeparatedState> out;
    for (auto& e : enumerate_eve_moves(a, step.instr, g_.state_at(2 * j + 1), u_)) {
      if (!sat_sep(e, pred, g_.rho, u_) || !wins(e, j + 1)) continue;
      out.push_back(std::move(e));
      if (first_only) break;
    }
    return out;
  }

  const Game& game() const { return g_; }
  const Universe& universe() const { return u_; }
  bool exhausted() const { return exhausted_; }
  std::size_t nodes() const { return memo_.size(); }

 private:
  Game g_;
  const Universe& u_;
  CheckOptions opts_;
  AdamMoves adam_;
  std::unordered_map<std::string, bool> memo_;
  bool exhausted_ = false;
};

class SolvedStrategy : public Strategy {
 public:
  explicit SolvedStrategy(std::shared_ptr<Solver> s) : s_(std::move(s)) {}

  NodePtr start(const SeparatedState& x) const override {
    const auto& g = s_->game();
    if (!sat_sep(x, g.predicate_at(1), g.rho, s_->universe()) || !s_->wins(x, 1)) return nullptr;
    return node_;
  }

  std::vector<EveMove> respond(const NodePtr&, const SeparatedState& x, std::size_t j) const override {
    std::vector<EveMove> out;
    for (auto& e : s_->answers(x, j, false)) out.push_back(EveMove{std::move(e), node_});
    return out;
  }

 private:
  std::shared_ptr<Solver> s_;
  NodePtr node_ = std::make_shared<PositionalNode>();
};

}  // namespace

CheckResult check_winning_strategy(const Strategy& strat, const Game& g, const Universe& u, CheckOptions opts) {
  return Checker(strat, g, u, opts).run();
}

SolveResult solve_eve(const Game& g, const Universe& u, CheckOptions opts) {
  auto solver = std::make_shared<Solver>(g, u, opts);
  SolveResult out;
  for (const auto& x : enumerate_separations(g.state_at(1), g.alphabet, u)) {
    if (!sat_sep(x, g.predicate_at(1), g.rho, u)) continue;
    if (!solver->wins(x, 1)) {
      out.verdict = solver->exhausted() ? Verdict::Unknown : Verdict::Fail;
      out.play = {x};
      break;
    }
  }
  out.nodes = solver->nodes();
  if (out.verdict == Verdict::Pass) out.strategy = std::make_shared<SolvedStrategy>(solver);
  return out;
}

std::string format_play(const std::vector<SeparatedState>& play, const Game& g, const Universe& u) {
  std::string out;
  for (std::size_t i = 0; i < play.size(); ++i) {
    const std::size_t pos = i + 1;
    std::string who;
    if (pos == 1)
      who = "start";
    else if (pos % 2 == 0)
      who = "adam env";
    else
      who = "eve " + to_string(g.trace.steps[pos / 2 - 1].instr);
    const bool ok = sat_sep(play[i], g.predicate_at(pos), g.rho, u);
    out += who + " | " + to_string(play[i]) + " | P" + std::to_string(pos) + " " + (ok ? "pass" : "fail") + "\n";
  }
  return out;
}

}  // namespace sepgame
