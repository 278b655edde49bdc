#include "sepgame/semantics.hpp"

#include <algorithm>

namespace sepgame {

Membership TransitionSystem::member(const Trace& t, WitnessPtr* witness) const {
  if (auto w = find(t, true)) {
    if (witness) *witness = w;
    return Membership::Returns;
  }
  if (auto w = find(t, false)) {
    if (witness) *witness = w;
    return Membership::In;
  }
  return Membership::NotIn;
}

namespace {

std::shared_ptr<Witness> make_witness(Witness::Kind k, bool returns) {
  auto w = std::make_shared<Witness>();
  w->kind = k;
  w->returns = returns;
  return w;
}

// First k steps; the target is the state at which the rest starts.
Trace prefix_of(const Trace& t, std::size_t k) {
  Trace out{t.source, {t.steps.begin(), t.steps.begin() + static_cast<std::ptrdiff_t>(k)}, t.target};
  if (k < t.steps.size()) out.target = t.steps[k].pre;
  return out;
}

Trace suffix_of(const Trace& t, std::size_t k) {
  Trace out{t.target, {t.steps.begin() + static_cast<std::ptrdiff_t>(k), t.steps.end()}, t.target};
  if (k < t.steps.size()) out.source = t.steps[k].pre;
  return out;
}

class AtomTS final : public TransitionSystem {
 public:
  AtomTS(Instr m, std::shared_ptr<const Universe> u) : m_(std::move(m)), u_(std::move(u)) {}

  WitnessPtr find(const Trace& t, bool need_return) const override {
    if (t.steps.size() > 1) return nullptr;
    if (t.steps.empty()) {
      if (need_return) return nullptr;
      return make_witness(Witness::Kind::Atom, false);
    }
    const auto& s = t.steps.front();
    if (!(s.instr == m_)) return nullptr;
    if (s.error && need_return) return nullptr;
    auto outs = machine_step(s.pre, m_, *u_);
    if (std::find(outs.begin(), outs.end(), StepOutcome{s.error, s.post}) == outs.end()) return nullptr;
    return make_witness(Witness::Kind::Atom, !s.error);
  }

 private:
  Instr m_;
  std::shared_ptr<const Universe> u_;
};

class SeqTS final : public TransitionSystem {
 public:
  SeqTS(TSPtr a, TSPtr b) : a_(std::move(a)), b_(std::move(b)) {}

  WitnessPtr find(const Trace& t, bool need_return) const override {
    if (!need_return) {
      if (auto w = a_->find(t, false)) {
        auto out = make_witness(Witness::Kind::SeqPrefix, false);
        out->kids = {w};
        return out;
      }
    }
    // returning traces of the first component are never empty
    for (std::size_t k = 1; k <= t.steps.size(); ++k) {
      auto w1 = a_->find(prefix_of(t, k), true);
      if (!w1) continue;
      auto w2 = b_->find(suffix_of(t, k), need_return);
      if (!w2) continue;
      auto out = make_witness(Witness::Kind::SeqSplit, need_return);
      out->k = k;
      out->kids = {w1, w2};
      return out;
    }
    return nullptr;
  }

 private:
  TSPtr a_, b_;
};

class ParTS final : public TransitionSystem {
 public:
  ParTS(TSPtr a, TSPtr b) : a_(std::move(a)), b_(std::move(b)) {}

  WitnessPtr find(const Trace& t, bool need_return) const override {
    const std::size_t n = t.steps.size();
    for (std::size_t p = 0; p <= n; ++p) {
      for (auto& w : shuffles(p, n - p)) {
        auto [l, r] = fibres(w);
        auto w1 = a_->find(restrict(l, t), need_return);
        if (!w1) continue;
        auto w2 = b_->find(restrict(r, t), need_return);
        if (!w2) continue;
        auto out = make_witness(Witness::Kind::Par, need_return);
        out->shuffle = std::move(w);
        out->kids = {w1, w2};
        return out;
      }
    }
    return nullptr;
  }

 private:
  TSPtr a_, b_;
};

class HideTS final : public TransitionSystem {
 public:
  HideTS(std::string r, TSPtr a) : r_(std::move(r)), a_(std::move(a)) {}

  WitnessPtr find(const Trace& t, bool need_return) const override {
    auto mentions = [&](const MachineState& s) { return s.locked.count(r_) > 0; };
    if (mentions(t.source) || mentions(t.target)) return nullptr;
    for (const auto& s : t.steps) {
      if (mentions(s.pre) || mentions(s.post)) return nullptr;
      if (s.instr.is_lock() && s.instr.name == r_) return nullptr;
    }
    Trace pre{t.source, {}, t.target};
    return search(t, pre, false, need_return);
  }

 private:
  // Depth-first over the preimage, tracking whether the hidden lock is held.
  // The lock is local to the resource block: it starts free and only the
  // code's own P/V steps change it, so the environment never touches it.
  WitnessPtr search(const Trace& t, Trace& pre, bool held, bool need_return) const {
    const std::size_t k = pre.steps.size();
    if (k == t.steps.size()) {
      Trace full = pre;
      if (held) full.target.locked.insert(r_);
      auto w = a_->find(full, need_return);
      if (!w) return nullptr;
      auto out = make_witness(Witness::Kind::Hide, need_return);
      out->preimage = std::move(full);
      out->kids = {w};
      return out;
    }
    const auto& s = t.steps[k];
    auto with_lock = [&](MachineState m, bool on) {
      if (on) m.locked.insert(r_);
      return m;
    };
    struct Choice {
      Instr instr;
      bool after;
    };
    std::vector<Choice> choices{{s.instr, held}};
    if (s.instr.kind == Instr::Kind::Nop && !s.error)
      choices.push_back({held ? Instr::release(r_) : Instr::acquire(r_), !held});
    for (const auto& c : choices) {
      CodeTransition step{with_lock(s.pre, held), c.instr, with_lock(s.post, c.after), s.error};
      pre.steps.push_back(std::move(step));
      // prune with the prefix, which must already be in the inner system
      Trace probe = pre;
      probe.target = with_lock(k + 1 < t.steps.size() ? t.steps[k + 1].pre : t.target, c.after);
      WitnessPtr found;
      if (a_->find(probe, false)) found = search(t, pre, c.after, need_return);
      pre.steps.pop_back();
      if (found) return found;
    }
    return nullptr;
  }

  std::string r_;
  TSPtr a_;
};

class GateTS final : public TransitionSystem {
 public:
  GateTS(BExprPtr b, bool polarity, TSPtr a) : b_(std::move(b)), polarity_(polarity), a_(std::move(a)) {}

  WitnessPtr find(const Trace& t, bool need_return) const override {
    // before the code's first move there is no state to test yet
    if (!t.steps.empty()) {
      auto v = eval_bool(*b_, t.steps.front().pre.mem);
      if (!v || *v != polarity_) return nullptr;
    }
    auto w = a_->find(t, need_return);
    if (!w) return nullptr;
    auto out = make_witness(Witness::Kind::Gate, need_return);
    out->kids = {w};
    return out;
  }

 private:
  BExprPtr b_;
  bool polarity_;
  TSPtr a_;
};

class AbortTS final : public TransitionSystem {
 public:
  explicit AbortTS(BExprPtr b) : b_(std::move(b)) {}

  WitnessPtr find(const Trace& t, bool need_return) const override {
    if (need_return || t.steps.size() > 1) return nullptr;
    if (t.steps.size() == 1) {
      const auto& s = t.steps.front();
      if (!s.error || s.instr.kind != Instr::Kind::Nop || s.post != s.pre) return nullptr;
      if (eval_bool(*b_, s.pre.mem)) return nullptr;
    }
    return make_witness(Witness::Kind::Abort, false);
  }

 private:
  BExprPtr b_;
};

class UnionTS final : public TransitionSystem {
 public:
  explicit UnionTS(std::vector<TSPtr> alts) : alts_(std::move(alts)) {}

  WitnessPtr find(const Trace& t, bool need_return) const override {
    for (std::size_t i = 0; i < alts_.size(); ++i) {
      if (auto w = alts_[i]->find(t, need_return)) {
        auto out = make_witness(Witness::Kind::Union, need_return);
        out->k = i;
        out->kids = {w};
        return out;
      }
    }
    return nullptr;
  }

 private:
  std::vector<TSPtr> alts_;
};

// Non-owning reference back to an enclosing loop.
class SelfTS final : public TransitionSystem {
 public:
  explicit SelfTS(const TransitionSystem* self) : self_(self) {}
  WitnessPtr find(const Trace& t, bool need_return) const override { return self_->find(t, need_return); }

 private:
  const TransitionSystem* self_;
};

// Least fixpoint of T ↦ whentrue(B)(nop); C; T ∪ whenfalse(B)(nop) ∪ whenabort(B).
// Every unfolding through the first alternative consumes the test step, so the
// recursion is bounded by the trace length.
class LoopTS final : public TransitionSystem {
 public:
  LoopTS(BExprPtr b, TSPtr body, std::shared_ptr<const Universe> u) {
    auto nop = ts_atom(Instr::nop(), u);
    auto self = std::make_shared<SelfTS>(this);
    unfolding_ = ts_union({ts_seq(ts_seq(ts_when(b, true, nop), std::move(body)), self), ts_when(b, false, nop),
                           ts_when_abort(b)});
  }

  WitnessPtr find(const Trace& t, bool need_return) const override {
    auto w = unfolding_->find(t, need_return);
    if (!w) return nullptr;
    auto out = make_witness(Witness::Kind::Loop, need_return);
    out->kids = {w};
    return out;
  }

 private:
  TSPtr unfolding_;
};

}  // namespace

TSPtr ts_atom(const Instr& m, std::shared_ptr<const Universe> u) { return std::make_shared<AtomTS>(m, std::move(u)); }
TSPtr ts_seq(TSPtr a, TSPtr b) { return std::make_shared<SeqTS>(std::move(a), std::move(b)); }
TSPtr ts_par(TSPtr a, TSPtr b) { return std::make_shared<ParTS>(std::move(a), std::move(b)); }
TSPtr ts_hide(const std::string& r, TSPtr a) { return std::make_shared<HideTS>(r, std::move(a)); }
TSPtr ts_when(BExprPtr b, bool polarity, TSPtr a) {
  return std::make_shared<GateTS>(std::move(b), polarity, std::move(a));
}
TSPtr ts_when_abort(BExprPtr b) { return std::make_shared<AbortTS>(std::move(b)); }
TSPtr ts_union(std::vector<TSPtr> alternatives) { return std::make_shared<UnionTS>(std::move(alternatives)); }

TSPtr ts_inside(const std::string& r, TSPtr a, std::shared_ptr<const Universe> u) {
  return ts_seq(ts_atom(Instr::acquire(r), u), ts_seq(std::move(a), ts_atom(Instr::release(r), u)));
}

TSPtr denote(const CommandPtr& c, std::shared_ptr<const Universe> u) {
  switch (c->kind) {
    case Command::Kind::Assign:
    case Command::Kind::Load:
    case Command::Kind::Store:
    case Command::Kind::Alloc:
    case Command::Kind::Dispose:
    case Command::Kind::Skip:
      return ts_atom(Instr::of_command(*c), u);
    case Command::Kind::Seq:
      return ts_seq(denote(c->c1, u), denote(c->c2, u));
    case Command::Kind::Par:
      return ts_par(denote(c->c1, u), denote(c->c2, u));
    case Command::Kind::Resource:
      return ts_hide(c->name, denote(c->c1, u));
    case Command::Kind::With:
      return ts_union({ts_when(c->cond, true, ts_inside(c->name, denote(c->c1, u), u)), ts_when_abort(c->cond)});
    case Command::Kind::If: {
      auto nop = ts_atom(Instr::nop(), u);
      return ts_union({ts_seq(ts_when(c->cond, true, nop), denote(c->c1, u)),
                       ts_seq(ts_when(c->cond, false, nop), denote(c->c2, u)), ts_when_abort(c->cond)});
    }
    case Command::Kind::While:
      return std::make_shared<LoopTS>(c->cond, denote(c->c1, u), u);
  }
  return nullptr;
}

// ---------------------------------------------------------------- enumeration

namespace {

void collect_guards(const Command& c, std::vector<BExprPtr>& out) {
  if (c.cond) out.push_back(c.cond);
  if (c.c1) collect_guards(*c.c1, out);
  if (c.c2) collect_guards(*c.c2, out);
}

void collect_with_locks(const Command& c, std::set<std::string>& out) {
  if (c.kind == Command::Kind::With) out.insert(c.name);
  if (c.c1) collect_with_locks(*c.c1, out);
  if (c.c2) collect_with_locks(*c.c2, out);
}

class Enumerator {
 public:
  Enumerator(const CommandPtr& c, std::shared_ptr<const Universe> u, const EnumerateOptions& opts)
      : u_(std::move(u)), ts_(denote(c, u_)), opts_(opts) {
    maxlen_ = opts.max_length ? *opts.max_length : u_->maxlen;
    collect_instrs(*c, instrs_);
    instrs_.insert(instrs_.begin(), Instr::nop());
    std::set<std::string> lock_names;
    collect_with_locks(*c, lock_names);
    for (const auto& r : lock_names) {
      instrs_.push_back(Instr::acquire(r));
      instrs_.push_back(Instr::release(r));
    }
    collect_guards(*c, guards_);
    if (u_->env == EnvPolicy::Exhaustive) everything_ = all_machine_states(*u_);
  }

  EnumerationResult run(const std::vector<MachineState>& inits) {
    for (const auto& s : inits) {
      if (result_.exhausted) break;
      Trace t{s, {}, s};
      extend(t, s);
    }
    return std::move(result_);
  }

 private:
  std::vector<MachineState> env_choices(const MachineState& s) const {
    switch (u_->env) {
      case EnvPolicy::Passive:
        return {s};
      case EnvPolicy::Moves: {
        std::vector<MachineState> out{s};
        for (const auto& m : u_->env_moves)
          if (auto t = apply_env_move(s, m); t && std::find(out.begin(), out.end(), *t) == out.end())
            out.push_back(*t);
        return out;
      }
      case EnvPolicy::Exhaustive:
        return everything_;
    }
    return {s};
  }

  bool emit(const Trace& t) {
    if (result_.traces.size() >= opts_.max_traces) {
      result_.exhausted = true;
      return false;
    }
    WitnessPtr w;
    auto m = ts_->member(t, &w);
    if (m == Membership::NotIn) return false;
    result_.traces.push_back(Enumerated{t, m == Membership::Returns, w});
    return true;
  }

  // `t` has its steps fixed; `last` is the state the code left the memory in.
  void extend(Trace& t, const MachineState& last) {
    std::vector<MachineState> live;
    for (auto& target : env_choices(last)) {
      t.target = target;
      if (emit(t)) live.push_back(target);
      if (result_.exhausted) return;
    }
    if (t.steps.size() >= maxlen_ || t.errors()) return;
    for (const auto& pre : live) {
      for (const auto& m : instrs_) {
        for (const auto& out : machine_step(pre, m, *u_)) {
          t.steps.push_back(CodeTransition{pre, m, out.post, out.error});
          extend(t, out.post);
          t.steps.pop_back();
          if (result_.exhausted) return;
        }
      }
      bool aborts = false;
      for (const auto& g : guards_) aborts = aborts || !eval_bool(*g, pre.mem);
      if (aborts) {
        t.steps.push_back(CodeTransition{pre, Instr::nop(), pre, true});
        extend(t, pre);
        t.steps.pop_back();
        if (result_.exhausted) return;
      }
    }
  }

  std::shared_ptr<const Universe> u_;
  TSPtr ts_;
  EnumerateOptions opts_;
  std::size_t maxlen_ = 0;
  std::vector<Instr> instrs_;
  std::vector<BExprPtr> guards_;
  std::vector<MachineState> everything_;
  EnumerationResult result_;
};

}  // namespace

EnumerationResult enumerate(const CommandPtr& c, const std::vector<MachineState>& inits,
                            std::shared_ptr<const Universe> u, const EnumerateOptions& opts) {
  return Enumerator(c, std::move(u), opts).run(inits);
}

}  // namespace sepgame
