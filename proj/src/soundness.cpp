#include "sepgame/soundness.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"

namespace sepgame {

namespace {

// ------------------------------------------------------------------ the plan

struct Event {
  enum class Kind { EnterFrame, ExitFrame, EnterPar, ExitPar, EnterRes, ExitRes, Audit };
  Kind kind = Kind::EnterFrame;
  std::string thread;
  std::string node;  // derivation path of the Frame or Res node
  FormulaPtr a;      // kid precondition (EnterPar: left)
  FormulaPtr b;      // R, J, or the right precondition
  std::string what;  // Audit: what is being checked
};

struct StepPlan {
  bool planned = false;
  std::string thread;
  Instr instr;         // what the thread executes, hidden locks included
  std::string hidden;  // Res node owning the lock, empty when visible
  FormulaPtr keep;     // release: the With's postcondition
  FormulaPtr give;     // release: the invariant
  std::string conj;    // innermost enclosing Conj, if any
};

struct Chunk {
  std::vector<Event> before;
  StepPlan step;
  std::vector<Event> after;
};

struct View {
  std::vector<CodeTransition> steps;
  std::vector<std::size_t> global;

  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
  View slice(std::size_t from, std::size_t to) const {
    View v;
    v.steps.assign(steps.begin() + static_cast<std::ptrdiff_t>(from), steps.begin() + static_cast<std::ptrdiff_t>(to));
    v.global.assign(global.begin() + static_cast<std::ptrdiff_t>(from),
                    global.begin() + static_cast<std::ptrdiff_t>(to));
    return v;
  }
  View pick(const std::vector<std::size_t>& f) const {
    View v;
    for (auto i : f) {
      v.steps.push_back(steps[i - 1]);
      v.global.push_back(global[i - 1]);
    }
    return v;
  }
};

using Scope = std::map<std::string, std::string>;

std::string kid_path(const std::string& path, std::size_t i) {
  return (path == "/" ? "/" : path + "/") + std::to_string(i);
}

const Witness& expect(const Witness& w, Witness::Kind k, std::size_t kids, const char* what) {
  if (w.kind != k || w.kids.size() < kids) throw ExtractionError(std::string("witness does not match ") + what);
  return w;
}

class Planner {
 public:
  explicit Planner(std::size_t n) : chunks(n) {}

  void walk(const Derivation& d, const std::string& path, const Witness& w, const View& v, const std::string& thread,
            const Scope& scope) {
    if (v.empty()) return;
    auto kid = [&](std::size_t i) -> const Derivation& {
      if (i >= d.kids.size()) throw ExtractionError("derivation node " + path + " is missing a premise");
      return *d.kids[i];
    };
    switch (d.rule) {
      case Rule::Frame:
        walk(kid(0), kid_path(path, 0), w, v, thread, scope);
        bracket(v, w.returns, {Event::Kind::EnterFrame, thread, path, kid(0).concl.pre, d.frame, ""},
                {Event::Kind::ExitFrame, thread, path, nullptr, nullptr, ""});
        return;
      case Rule::Conj: {
        // play the left premise, audit the right one at both ends
        const std::string outer = conj_;
        conj_ = path;
        walk(kid(0), kid_path(path, 0), w, v, thread, scope);
        conj_ = outer;
        bracket(v, w.returns,
                {Event::Kind::Audit, thread, path, kid(1).concl.pre, nullptr, "the right premise's precondition"},
                {Event::Kind::Audit, thread, path, kid(1).concl.post, nullptr, "the right premise's postcondition"});
        return;
      }
      case Rule::ExtConseq:
        walk(kid(0), kid_path(path, 0), w, v, thread, scope);
        return;
      case Rule::Aff:
      case Rule::Store:
      case Rule::Load:
      case Rule::ExtSkip:
      case Rule::ExtAlloc:
      case Rule::ExtDispose:
        expect(w, Witness::Kind::Atom, 0, "an atomic command");
        atom(v, thread);
        return;
      case Rule::Seq:
        seq(w, v, [&](const Witness& w1, const View& v1) { walk(kid(0), kid_path(path, 0), w1, v1, thread, scope); },
            [&](const Witness& w2, const View& v2) { walk(kid(1), kid_path(path, 1), w2, v2, thread, scope); });
        return;
      case Rule::If: {
        const auto& un = expect(w, Witness::Kind::Union, 1, "if");
        if (un.k == 2) {
          atom(v, thread);
          return;
        }
        seq(*un.kids[0], v, [&](const Witness&, const View& v1) { atom(v1, thread); },
            [&](const Witness& w2, const View& v2) {
              walk(kid(un.k), kid_path(path, un.k), w2, v2, thread, scope);
            });
        return;
      }
      case Rule::ExtWhile:
        loop(d, path, w, v, thread, scope);
        return;
      case Rule::Par: {
        const auto& p = expect(w, Witness::Kind::Par, 2, "parallel composition");
        auto [l, r] = fibres(p.shuffle);
        walk(kid(0), kid_path(path, 0), *p.kids[0], v.pick(l), thread + "/0", scope);
        walk(kid(1), kid_path(path, 1), *p.kids[1], v.pick(r), thread + "/1", scope);
        bracket(v, w.returns, {Event::Kind::EnterPar, thread, path, kid(0).concl.pre, kid(1).concl.pre, ""},
                {Event::Kind::ExitPar, thread, path, nullptr, nullptr, ""});
        return;
      }
      case Rule::Res: {
        const auto& h = expect(w, Witness::Kind::Hide, 1, "a resource block");
        if (h.preimage.steps.size() != v.size()) throw ExtractionError("hidden preimage changes the trace length");
        View inner{h.preimage.steps, v.global};
        Scope s = scope;
        s[d.concl.cmd->name] = path;
        walk(kid(0), kid_path(path, 0), *h.kids[0], inner, thread, s);
        bracket(v, w.returns, {Event::Kind::EnterRes, thread, path, kid(0).concl.pre, d.invariant, ""},
                {Event::Kind::ExitRes, thread, path, nullptr, nullptr, ""});
        return;
      }
      case Rule::With: {
        const auto& un = expect(w, Witness::Kind::Union, 1, "with");
        if (un.k == 1) {
          atom(v, thread);
          return;
        }
        const auto& gate = expect(*un.kids[0], Witness::Kind::Gate, 1, "with");
        const std::string& r = d.concl.cmd->name;
        auto it = scope.find(r);
        const std::string hidden = it == scope.end() ? "" : it->second;
        auto inv = d.concl.ctx.find(r);
        FormulaPtr give = inv == d.concl.ctx.end() ? Formula::emp() : inv->second;
        seq(*gate.kids[0], v,
            [&](const Witness&, const View& v1) { place(v1, {true, thread, Instr::acquire(r), hidden, nullptr, nullptr, conj_}); },
            [&](const Witness& w2, const View& v2) {
              seq(w2, v2,
                  [&](const Witness& wb, const View& vb) { walk(kid(0), kid_path(path, 0), wb, vb, thread, scope); },
                  [&](const Witness&, const View& vr) {
                    place(vr, {true, thread, Instr::release(r), hidden, d.concl.post, give, conj_});
                  });
            });
        return;
      }
    }
  }

  std::vector<Chunk> chunks;

 private:
  std::string conj_;

  template <class F, class G>
  void seq(const Witness& w, const View& v, F first, G second) {
    if (w.kind == Witness::Kind::SeqPrefix && w.kids.size() == 1) {
      first(*w.kids[0], v);
      return;
    }
    expect(w, Witness::Kind::SeqSplit, 2, "sequential composition");
    if (w.k > v.size()) throw ExtractionError("sequential split beyond the trace");
    first(*w.kids[0], v.slice(0, w.k));
    second(*w.kids[1], v.slice(w.k, v.size()));
  }

  void loop(const Derivation& d, const std::string& path, const Witness& w, const View& v, const std::string& thread,
            const Scope& scope) {
    if (v.empty()) return;
    const auto& lp = expect(w, Witness::Kind::Loop, 1, "while");
    const auto& un = expect(*lp.kids[0], Witness::Kind::Union, 1, "while");
    if (un.k != 0) {
      atom(v, thread);
      return;
    }
    if (d.kids.empty()) throw ExtractionError("while node without a body derivation");
    seq(*un.kids[0], v,
        [&](const Witness& w1, const View& v1) {
          seq(w1, v1, [&](const Witness&, const View& vg) { atom(vg, thread); },
              [&](const Witness& wb, const View& vb) { walk(*d.kids[0], kid_path(path, 0), wb, vb, thread, scope); });
        },
        [&](const Witness& w2, const View& v2) { loop(d, path, w2, v2, thread, scope); });
  }

  void atom(const View& v, const std::string& thread) {
    if (v.size() > 1) throw ExtractionError("atomic command with more than one step");
    place(v, {true, thread, v.steps.empty() ? Instr::nop() : v.steps[0].instr, "", nullptr, nullptr, conj_});
  }

  void place(const View& v, StepPlan p) {
    if (v.empty()) return;
    if (v.size() != 1) throw ExtractionError("single step expected");
    auto& c = chunks.at(v.global[0]);
    if (c.step.planned) throw ExtractionError("two threads claim one step");
    c.step = std::move(p);
  }

  void bracket(const View& v, bool returns, Event enter, Event exit) {
    auto& first = chunks.at(v.global.front()).before;
    first.insert(first.begin(), std::move(enter));
    if (returns) chunks.at(v.global.back()).after.push_back(std::move(exit));
  }
};

// ------------------------------------------------------------ Eve's holdings

struct Holdings {
  std::map<std::string, LogicalState> threads;
  std::map<std::string, LogicalState> frames;
  std::map<std::string, std::optional<LogicalState>> hidden;  // nullopt while a thread holds it

  std::optional<LogicalState> total() const {
    std::optional<LogicalState> acc = LogicalState{};
    auto add = [&](const LogicalState& s) {
      if (acc) acc = tensor(*acc, s);
    };
    for (const auto& [k, s] : threads) add(s);
    for (const auto& [k, s] : frames) add(s);
    for (const auto& [k, s] : hidden)
      if (s) add(*s);
    return acc;
  }

  std::string key() const {
    std::string out;
    for (const auto& [k, s] : threads) out += "thread " + k + " " + to_string(s) + "\n";
    for (const auto& [k, s] : frames) out += "frame " + k + " " + to_string(s) + "\n";
    for (const auto& [k, s] : hidden) out += "hidden " + k + " " + (s ? to_string(*s) : "held") + "\n";
    return out;
  }
};

struct HoldingsNode : StrategyNode {
  Holdings h;
  std::string k;
  explicit HoldingsNode(Holdings x) : h(std::move(x)), k(h.key()) {}
  std::string key() const override { return k; }
};

class Extracted : public Strategy {
 public:
  Extracted(std::vector<Chunk> chunks, Trace t, FormulaPtr pre, Context ctx, Universe u, Valuation rho)
      : chunks_(std::move(chunks)),
        trace_(std::move(t)),
        pre_(std::move(pre)),
        ctx_(std::move(ctx)),
        u_(std::move(u)),
        rho_(std::move(rho)) {}

  NodePtr start(const SeparatedState& x) const override {
    if (!sat_sep(x, {pre_, ctx_, Formula::truth(true)}, rho_, u_)) return nullptr;
    Holdings h;
    h.threads["0"] = x.code;
    return std::make_shared<HoldingsNode>(std::move(h));
  }

  std::vector<EveMove> respond(const NodePtr& at, const SeparatedState& x, std::size_t j) const override {
    const auto* n = dynamic_cast<const HoldingsNode*>(at.get());
    if (!n || j < 1 || j > chunks_.size()) return {};
    Holdings h = n->h;
    if (h.total() != x.code) return {};
    const auto& c = chunks_[j - 1];
    const auto& step = trace_.steps[j - 1];
    if (step.error || !c.step.planned) return {};
    SeparatedState next = x;
    for (const auto& e : c.before)
      if (!apply(e, h)) return {};
    if (!play(c.step, step, h, next)) return {};
    for (const auto& e : c.after)
      if (!apply(e, h)) return {};
    auto code = h.total();
    if (!code) return {};
    next.code = std::move(*code);
    if (!well_formed(next) || combine(next) != step.post) return {};
    return {EveMove{std::move(next), std::make_shared<HoldingsNode>(std::move(h))}};
  }

 private:
  // First (left, right) split of s with left ⊨ a under `amb_a` and right ⊨ b,
  // trying valuations of the free variables ρ leaves open. An empty
  // ambient for b means b is judged on its own state.
  std::optional<std::pair<LogicalState, LogicalState>> split(const LogicalState& s, const Formula& a,
                                                             const std::optional<MemoryState>& amb_a, const Formula& b,
                                                             const std::optional<MemoryState>& amb_b) const {
    std::set<std::string> free;
    collect_free_logical_vars(a, free);
    collect_free_logical_vars(b, free);
    for (const auto& [k, v] : rho_) free.erase(k);
    auto judge = [&](const LogicalState& x, const Formula& f, const std::optional<MemoryState>& amb,
                     const Valuation& r) { return amb ? satisfies_in(*amb, x, f, r, u_) : satisfies(x, f, r, u_); };
    const auto parts = substates(s, u_.perms);
    for (auto nu : valuations(free, u_)) {
      for (const auto& [k, v] : rho_) nu[k] = v;
      for (const auto& [l, r] : parts)
        if (judge(l, a, amb_a, nu) && judge(r, b, amb_b, nu)) return std::make_pair(l, r);
    }
    return std::nullopt;
  }

  bool apply(const Event& e, Holdings& h) const {
    using K = Event::Kind;
    auto total = h.total();
    if (!total) return false;
    const MemoryState global = erase(*total);
    auto merge_into = [&](const std::string& t, const LogicalState& s) {
      auto m = tensor(h.threads[t], s);
      if (!m) return false;
      h.threads[t] = std::move(*m);
      return true;
    };
    switch (e.kind) {
      case K::Audit: {
        auto it = h.threads.find(e.thread);
        if (it == h.threads.end()) return false;
        if (!holds(global, it->second, *e.a))
          alarm("conj at " + e.node + ": " + e.what + " fails on " + to_string(it->second));
        return true;
      }
      case K::EnterFrame:
      case K::EnterPar:
      case K::EnterRes: {
        auto it = h.threads.find(e.thread);
        if (it == h.threads.end()) return false;
        // resource invariants are judged on their own state, like in the game
        std::optional<MemoryState> amb_b;
        if (e.kind != K::EnterRes) amb_b = global;
        auto parts = split(it->second, *e.a, global, *e.b, amb_b);
        if (!parts) return false;
        if (e.kind == K::EnterPar) {
          h.threads.erase(it);
          h.threads[e.thread + "/0"] = parts->first;
          h.threads[e.thread + "/1"] = parts->second;
        } else {
          it->second = parts->first;
          if (e.kind == K::EnterFrame)
            h.frames[e.node] = parts->second;
          else
            h.hidden[e.node] = parts->second;
        }
        return true;
      }
      case K::ExitFrame: {
        auto f = h.frames.find(e.node);
        if (f == h.frames.end()) return false;
        auto s = f->second;
        h.frames.erase(f);
        return merge_into(e.thread, s);
      }
      case K::ExitRes: {
        auto r = h.hidden.find(e.node);
        if (r == h.hidden.end() || !r->second) return false;
        auto s = *r->second;
        h.hidden.erase(r);
        return merge_into(e.thread, s);
      }
      case K::ExitPar: {
        auto l = h.threads.find(e.thread + "/0");
        auto r = h.threads.find(e.thread + "/1");
        if (l == h.threads.end() || r == h.threads.end()) return false;
        auto m = tensor(l->second, r->second);
        if (!m) return false;
        h.threads.erase(e.thread + "/0");
        h.threads.erase(e.thread + "/1");
        h.threads[e.thread] = std::move(*m);
        return true;
      }
    }
    return false;
  }

  bool play(const StepPlan& p, const CodeTransition& step, Holdings& h, SeparatedState& next) const {
    auto it = h.threads.find(p.thread);
    if (it == h.threads.end()) return false;
    LogicalState& mine = it->second;
    if (p.instr.kind == Instr::Kind::Acquire) {
      std::optional<LogicalState> got;
      if (!p.hidden.empty()) {
        auto slot = h.hidden.find(p.hidden);
        if (slot == h.hidden.end() || !slot->second) return false;
        got = std::move(slot->second);
        slot->second.reset();
      } else {
        auto slot = next.resources.find(p.instr.name);
        if (slot == next.resources.end() || slot->second.kind != ResourceSlot::Kind::Available) return false;
        got = slot->second.state;
        slot->second = ResourceSlot::code();
      }
      auto m = tensor(mine, *got);
      if (!m) return false;
      mine = std::move(*m);
      return true;
    }
    if (p.instr.kind == Instr::Kind::Release) {
      const bool hidden = !p.hidden.empty();
      if (hidden) {
        auto slot = h.hidden.find(p.hidden);
        if (slot == h.hidden.end() || slot->second) return false;
      } else {
        auto slot = next.resources.find(p.instr.name);
        if (slot == next.resources.end() || slot->second.kind != ResourceSlot::Kind::HeldByCode) return false;
      }
      // what the thread keeps is judged against the code state after the release;
      // among the splits that work, the smallest invariant part wins
      std::set<std::string> free;
      collect_free_logical_vars(*p.keep, free);
      collect_free_logical_vars(*p.give, free);
      for (const auto& [k, v] : rho_) free.erase(k);
      const auto rhos = valuations(free, u_);
      std::optional<Holdings> best;
      std::optional<LogicalState> best_give;
      std::set<LogicalState> gives;
      auto size = [](const LogicalState& x) { return x.stack.size() + x.heap.size(); };
      for (const auto& [keep, give] : substates(mine, u_.perms)) {
        Holdings after = h;
        after.threads[p.thread] = keep;
        if (hidden) after.hidden[p.hidden] = give;
        auto total = after.total();
        if (!total) continue;
        const auto amb = erase(*total);
        for (auto nu : rhos) {
          for (const auto& [k, v] : rho_) nu[k] = v;
          if (!satisfies(give, *p.give, nu, u_) || !satisfies_in(amb, keep, *p.keep, nu, u_)) continue;
          gives.insert(give);
          if (!best_give || size(give) < size(*best_give)) {
            best = std::move(after);
            best_give = give;
          }
          break;
        }
      }
      if (!best) return false;
      if (!p.conj.empty() && gives.size() > 1)
        alarm("conj at " + p.conj + ": the release of " + p.instr.name + " can hand over " +
              std::to_string(gives.size()) + " different states");
      h = std::move(*best);
      if (!hidden) next.resources[p.instr.name] = ResourceSlot::available(*best_give);
      return true;
    }
    // footprint: only the running thread may see its cells change
    const auto& pre = step.pre.mem;
    const auto& post = step.post.mem;
    auto touch = [&](LogicalState& s, bool running) {
      for (auto k = s.stack.begin(); k != s.stack.end();) {
        auto q = post.stack.find(k->first);
        if (q == post.stack.end() || q->second != k->second.value) {
          if (!running) return false;
          if (q == post.stack.end()) {
            k = s.stack.erase(k);
            continue;
          }
          k->second.value = q->second;
        }
        ++k;
      }
      for (auto k = s.heap.begin(); k != s.heap.end();) {
        auto q = post.heap.find(k->first);
        if (q == post.heap.end() || q->second != k->second.value) {
          if (!running) return false;
          if (q == post.heap.end()) {
            k = s.heap.erase(k);
            continue;
          }
          k->second.value = q->second;
        }
        ++k;
      }
      return true;
    };
    for (auto& [k, s] : h.threads)
      if (!touch(s, k == p.thread)) return false;
    for (auto& [k, s] : h.frames)
      if (!touch(s, false)) return false;
    for (auto& [k, s] : h.hidden)
      if (s && !touch(*s, false)) return false;
    for (const auto& [k, v] : post.stack)
      if (!pre.stack.count(k)) mine.stack[k] = Cell{v, Perm::full()};
    for (const auto& [k, v] : post.heap)
      if (!pre.heap.count(k)) mine.heap[k] = Cell{v, Perm::full()};
    return true;
  }

  bool holds(const MemoryState& amb, const LogicalState& s, const Formula& f) const {
    std::set<std::string> free;
    collect_free_logical_vars(f, free);
    for (const auto& [k, v] : rho_) free.erase(k);
    for (auto nu : valuations(free, u_)) {
      for (const auto& [k, v] : rho_) nu[k] = v;
      if (satisfies_in(amb, s, f, nu, u_)) return true;
    }
    return false;
  }

  void alarm(std::string what) const {
    std::lock_guard<std::mutex> lock(mu_);
    alarms_.insert(std::move(what));
  }

 public:
  std::vector<std::string> alarms() const {
    std::lock_guard<std::mutex> lock(mu_);
    return {alarms_.begin(), alarms_.end()};
  }

 private:
  mutable std::mutex mu_;
  mutable std::set<std::string> alarms_;
  std::vector<Chunk> chunks_;
  Trace trace_;
  FormulaPtr pre_;
  Context ctx_;
  Universe u_;
  Valuation rho_;
};

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < jobs; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

std::string sequent_text(const Derivation& d) {
  std::string ctx;
  for (const auto& [r, j] : d.concl.ctx) ctx += (ctx.empty() ? "" : ", ") + r + ": " + to_string(*j);
  return ctx + " |- {" + to_string(*d.concl.pre) + "} " + to_string(*d.concl.cmd) + " {" + to_string(*d.concl.post) +
         "}";
}

nlohmann::ordered_json rho_json(const Valuation& rho) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rho) j[k] = v;
  return j;
}

}  // namespace

std::shared_ptr<const Strategy> extract_strategy(const Derivation& d, const Trace& t, const WitnessPtr& w,
                                                 const Universe& u, const Valuation& rho) {
  if (!w) throw ExtractionError("no witness");
  Planner p(t.length());
  View v{t.steps, {}};
  for (std::size_t i = 0; i < t.length(); ++i) v.global.push_back(i);
  p.walk(d, "/", *w, v, "0", {});
  for (std::size_t i = 0; i < t.length(); ++i)
    if (!p.chunks[i].step.planned) throw ExtractionError("step " + std::to_string(i + 1) + " has no thread");
  return std::make_shared<Extracted>(std::move(p.chunks), t, d.concl.pre, d.concl.ctx, u, rho);
}

std::vector<std::string> extraction_alarms(const Strategy& s) {
  if (const auto* e = dynamic_cast<const Extracted*>(&s)) return e->alarms();
  return {};
}

Game root_game(const Derivation& d, const Enumerated& e, const Valuation& rho) {
  return make_game(d.concl.pre, d.concl.ctx, d.concl.post, e.trace, e.returns, rho);
}

std::vector<Valuation> root_valuations(const Derivation& d, const Universe& u) {
  std::set<std::string> free;
  collect_free_logical_vars(*d.concl.pre, free);
  collect_free_logical_vars(*d.concl.post, free);
  for (const auto& [r, j] : d.concl.ctx) collect_free_logical_vars(*j, free);
  return valuations(free, u);
}

std::vector<MachineState> initial_states(const Universe& u) {
  std::vector<MachineState> out;
  for (const auto& s : u.inits) {
    MachineState m{erase(s), {}};
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));
  }
  return out;
}

VerifyReport verify_proof(const Derivation& d, const Universe& u, const VerifyOptions& opts) {
  auto up = std::make_shared<const Universe>(u);
  auto en = enumerate(d.concl.cmd, initial_states(u), up, opts.enumerate);
  const auto rhos = root_valuations(d, u);
  VerifyReport rep;
  rep.traces = en.traces.size();
  rep.exhausted = en.exhausted;
  for (const auto& e : en.traces) {
    rep.returning += e.returns;
    rep.not_liftable += e.trace.errors();
  }
  const std::size_t games = en.traces.size() * rhos.size();
  std::vector<CheckResult> results(games);
  parallel_for(games, opts.jobs, [&](std::size_t i) {
    const auto& e = en.traces[i / rhos.size()];
    const auto& rho = rhos[i % rhos.size()];
    try {
      auto strat = extract_strategy(d, e.trace, e.witness, u, rho);
      results[i] = check_winning_strategy(*strat, root_game(d, e, rho), u, opts.check);
      auto alarms = extraction_alarms(*strat);
      if (!alarms.empty() && results[i].verdict == Verdict::Pass) {
        results[i].verdict = Verdict::Fail;
        results[i].reason = "alarm: " + alarms.front();
      }
    } catch (const std::exception& ex) {
      results[i].verdict = Verdict::Fail;
      results[i].reason = std::string("extraction: ") + ex.what();
    }
  });
  rep.games = games;
  for (std::size_t i = 0; i < games; ++i) {
    auto& r = results[i];
    rep.max_nodes = std::max(rep.max_nodes, r.nodes);
    if (r.nodes > 0) ++rep.played;
    if (r.verdict == Verdict::Pass) {
      ++rep.passed;
      continue;
    }
    if (r.verdict == Verdict::Unknown) ++rep.unknown;
    const auto& e = en.traces[i / rhos.size()];
    rep.failures.push_back(GameFailure{i / rhos.size(), e.trace, e.returns, rhos[i % rhos.size()], std::move(r)});
  }
  return rep;
}

CorollaryReport verify_corollary(const Derivation& d, const Universe& u, const VerifyOptions& opts) {
  if (!d.concl.ctx.empty()) throw ExtractionError("the corollary needs an empty resource context");
  Universe pu = u;
  pu.env = EnvPolicy::Passive;
  auto up = std::make_shared<const Universe>(pu);
  auto en = enumerate(d.concl.cmd, initial_states(pu), up, opts.enumerate);
  const auto rhos = root_valuations(d, pu);
  const FormulaPtr q_true = Formula::star(d.concl.post, Formula::truth(true));

  struct Outcome {
    bool started = false;
    std::vector<std::string> problems;
  };
  std::vector<Outcome> outcomes(en.traces.size());
  parallel_for(en.traces.size(), opts.jobs, [&](std::size_t i) {
    const auto& e = en.traces[i];
    auto& out = outcomes[i];
    for (const auto& rho : rhos) {
      const Game g = root_game(d, e, rho);
      std::shared_ptr<const Strategy> strat;
      try {
        strat = extract_strategy(d, e.trace, e.witness, pu, rho);
      } catch (const std::exception& ex) {
        out.problems.push_back(std::string("extraction: ") + ex.what());
        return;
      }
      for (const auto& init : pu.inits) {
        if (MachineState{erase(init), {}} != e.trace.source) continue;
        for (const auto& [code, frame] : substates(init, pu.perms)) {
          SeparatedState x{code, {}, frame};
          for (const auto& r : g.alphabet) x.resources[r] = ResourceSlot::available({});
          NodePtr n = strat->start(x);
          if (!n) continue;
          out.started = true;
          bool stuck = false;
          for (std::size_t j = 1; j <= e.trace.length() && !stuck; ++j) {
            // a passive environment leaves the state where the code put it
            auto answers = strat->respond(n, x, j);
            if (answers.empty()) {
              out.problems.push_back(e.trace.steps[j - 1].error
                                         ? "error step " + std::to_string(j) + " from " + to_string(x)
                                         : "no answer at step " + std::to_string(j) + " from " + to_string(x));
              stuck = true;
              break;
            }
            x = answers.front().state;
            n = answers.front().node;
          }
          if (stuck || !e.returns) continue;
          auto whole = big_tensor(x);
          if (!satisfies(x.code, *d.concl.post, rho, pu))
            out.problems.push_back("final code state " + to_string(x.code) + " misses the postcondition");
          else if (!whole || !satisfies(*whole, *q_true, rho, pu))
            out.problems.push_back("final memory misses Q * true");
        }
      }
    }
  });

  CorollaryReport rep;
  rep.traces = en.traces.size();
  rep.exhausted = en.exhausted;
  for (std::size_t i = 0; i < en.traces.size(); ++i) {
    const auto& e = en.traces[i];
    if (!outcomes[i].started) continue;
    ++rep.started;
    rep.returning += e.returns;
    if (e.trace.errors()) ++rep.error_steps;
    for (auto& p : outcomes[i].problems) rep.failures.push_back({e.trace, std::move(p)});
  }
  return rep;
}

namespace {

nlohmann::ordered_json corollary_json(const CorollaryReport& r) {
  nlohmann::ordered_json j;
  j["traces_checked"] = r.started;
  j["traces_enumerated"] = r.traces;
  j["returning"] = r.returning;
  j["error_steps"] = r.error_steps;
  j["enumeration_exhausted"] = r.exhausted;
  j["failures"] = nlohmann::ordered_json::array();
  for (const auto& f : r.failures) j["failures"].push_back({{"trace", serialize(f.trace)}, {"reason", f.reason}});
  return j;
}

}  // namespace

std::string to_json(const VerifyReport& r, const Derivation& d, const Universe& u, const ReportOptions& o) {
  nlohmann::ordered_json j;
  j["program"] = to_string(*d.concl.cmd);
  j["proof"] = sequent_text(d);
  j["universe"] = u.describe();
  j["traces_checked"] = r.traces;
  j["returning"] = r.returning;
  j["not_liftable"] = r.not_liftable;
  j["games"] = r.games;
  j["passed"] = r.passed;
  j["played"] = r.played;
  j["unknown"] = r.unknown;
  j["enumeration_exhausted"] = r.exhausted;
  j["failures"] = nlohmann::ordered_json::array();
  for (const auto& f : r.failures) {
    nlohmann::ordered_json x;
    x["trace_index"] = f.trace_index;
    x["trace"] = serialize(f.trace);
    x["returns"] = f.returns;
    x["rho"] = rho_json(f.rho);
    x["verdict"] = to_string(f.result.verdict);
    x["reason"] = f.result.reason;
    if (o.replays) {
      const Game g = make_game(d.concl.pre, d.concl.ctx, d.concl.post, f.trace, f.returns, f.rho);
      x["play"] = format_play(f.result.play, g, u);
    }
    j["failures"].push_back(std::move(x));
  }
  j["corollary"] = o.corollary ? corollary_json(*o.corollary) : nlohmann::ordered_json();
  j["extension_rules_used"] = o.extensions_used;
  return j.dump(2) + "\n";
}

std::string to_json(const CorollaryReport& r, const Derivation& d, const Universe& u,
                    const std::set<std::string>& extensions_used) {
  nlohmann::ordered_json j;
  j["program"] = to_string(*d.concl.cmd);
  j["proof"] = sequent_text(d);
  j["universe"] = u.describe();
  j.update(corollary_json(r));
  j["extension_rules_used"] = extensions_used;
  return j.dump(2) + "\n";
}

}  // namespace sepgame
