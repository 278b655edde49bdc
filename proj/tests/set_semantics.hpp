#pragma once
// Definition-level trace semantics: every transition system is an explicit
// set of traces over all states of a tiny universe, up to a length bound.
// Used as the oracle for the recognizers.

#include <map>
#include <string>

#include "sepgame/semantics.hpp"

namespace oracle {

using namespace sepgame;

struct TraceSet {
  std::map<std::string, Trace> all;
  std::map<std::string, Trace> ret;

  void add(const Trace& t, bool returns) {
    const std::string key = serialize(t);
    all.emplace(key, t);
    if (returns) ret.emplace(key, t);
  }
  bool operator==(const TraceSet& o) const {
    if (all.size() != o.all.size() || ret.size() != o.ret.size()) return false;
    for (const auto& [k, v] : all)
      if (!o.all.count(k)) return false;
    for (const auto& [k, v] : ret)
      if (!o.ret.count(k)) return false;
    return true;
  }
};

class SetSemantics {
 public:
  SetSemantics(const Universe& u, std::size_t max_len) : u_(u), len_(max_len), states_(all_machine_states(u)) {}

  const std::vector<MachineState>& states() const { return states_; }

  // every system contains the traces where only the environment has moved
  TraceSet empties() const {
    TraceSet out;
    for (const auto& s1 : states_)
      for (const auto& s2 : states_) out.add(Trace{s1, {}, s2}, false);
    return out;
  }

  TraceSet atom(const Instr& m) const {
    TraceSet out = empties();
    for (const auto& s2 : states_) {
      auto outs = machine_step(s2, m, u_);
      if (len_ < 1) continue;
      for (const auto& o : outs)
        for (const auto& s1 : states_)
          for (const auto& s4 : states_) out.add(Trace{s1, {CodeTransition{s2, m, o.post, o.error}}, s4}, !o.error);
    }
    return out;
  }

  TraceSet seq(const TraceSet& a, const TraceSet& b) const {
    TraceSet out;
    for (const auto& [k, t] : a.all) out.add(t, false);
    for (const auto& [k1, t1] : a.ret)
      for (const auto& [k2, t2] : b.all) {
        if (t1.target != t2.source || t1.length() + t2.length() > len_) continue;
        out.add(seq_compose(t1, t2), b.ret.count(k2) > 0);
      }
    return out;
  }

  TraceSet par(const TraceSet& a, const TraceSet& b) const {
    TraceSet out;
    for (const auto& [k1, t1] : a.all)
      for (const auto& [k2, t2] : b.all) {
        if (t1.length() + t2.length() > len_) continue;
        const bool r = a.ret.count(k1) && b.ret.count(k2);
        for (const auto& [w, t] : par_compose(t1, t2)) out.add(t, r);
      }
    return out;
  }

  // image of the traces in which r is local: free at the source, flipped only
  // by the code's own P(r)/V(r)
  TraceSet hide_local(const std::string& r, const TraceSet& a) const {
    TraceSet out;
    for (const auto& [k, t] : a.all) {
      bool held = false;
      bool local = !t.source.locked.count(r);
      for (const auto& s : t.steps) {
        local = local && (s.pre.locked.count(r) > 0) == held;
        if (s.instr.is_lock() && s.instr.name == r) held = s.instr.kind == Instr::Kind::Acquire;
        local = local && (s.post.locked.count(r) > 0) == held;
      }
      local = local && (t.target.locked.count(r) > 0) == held;
      if (local) out.add(hide(r, t), a.ret.count(k) > 0);
    }
    return out;
  }

  TraceSet when(const BExpr& b, bool polarity, const TraceSet& a) const {
    TraceSet out;
    for (const auto& [k, t] : a.all) {
      if (t.steps.empty()) {
        out.add(t, false);
        continue;
      }
      auto v = eval_bool(b, t.steps.front().pre.mem);
      if (v && *v == polarity) out.add(t, a.ret.count(k) > 0);
    }
    return out;
  }

  TraceSet when_abort(const BExpr& b) const {
    TraceSet out = empties();
    for (const auto& s2 : states_) {
      if (eval_bool(b, s2.mem)) continue;
      if (len_ < 1) continue;
      for (const auto& s1 : states_)
        for (const auto& s4 : states_) out.add(Trace{s1, {CodeTransition{s2, Instr::nop(), s2, true}}, s4}, false);
    }
    return out;
  }

  static TraceSet unite(const std::vector<TraceSet>& xs) {
    TraceSet out;
    for (const auto& x : xs) {
      for (const auto& [k, t] : x.all) out.add(t, false);
      for (const auto& [k, t] : x.ret) out.add(t, true);
    }
    return out;
  }

  TraceSet denote(const Command& c) const {
    switch (c.kind) {
      case Command::Kind::Seq:
        return seq(denote(*c.c1), denote(*c.c2));
      case Command::Kind::Par:
        return par(denote(*c.c1), denote(*c.c2));
      case Command::Kind::Resource:
        return hide_local(c.name, denote(*c.c1));
      case Command::Kind::With: {
        auto inside = seq(atom(Instr::acquire(c.name)), seq(denote(*c.c1), atom(Instr::release(c.name))));
        return unite({when(*c.cond, true, inside), when_abort(*c.cond)});
      }
      case Command::Kind::If: {
        auto nop = atom(Instr::nop());
        return unite({seq(when(*c.cond, true, nop), denote(*c.c1)), seq(when(*c.cond, false, nop), denote(*c.c2)),
                      when_abort(*c.cond)});
      }
      case Command::Kind::While: {
        auto nop = atom(Instr::nop());
        auto body = denote(*c.c1);
        auto test = seq(when(*c.cond, true, nop), body);
        auto exit = unite({when(*c.cond, false, nop), when_abort(*c.cond)});
        TraceSet w;
        for (;;) {
          auto next = unite({seq(test, w), exit});
          if (next == w) return w;
          w = std::move(next);
        }
      }
      default:
        return atom(Instr::of_command(c));
    }
  }

 private:
  Universe u_;
  std::size_t len_;
  std::vector<MachineState> states_;
};

}  // namespace oracle
