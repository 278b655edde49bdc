#include "sepgame/logic.hpp"

#include <algorithm>

namespace sepgame {

std::optional<Value> eval_logical(const Expr& e, const MemoryState& m, const Valuation& rho) {
  switch (e.kind) {
    case Expr::Kind::Lit:
      return e.value;
    case Expr::Kind::Var: {
      if (is_logical_var(e.name)) {
        auto it = rho.find(e.name);
        if (it == rho.end()) throw LogicError("logical variable " + e.name + " has no value");
        return it->second;
      }
      auto it = m.stack.find(e.name);
      if (it == m.stack.end()) return std::nullopt;
      return it->second;
    }
    case Expr::Kind::Add:
    case Expr::Kind::Mul: {
      auto a = eval_logical(*e.lhs, m, rho);
      auto b = eval_logical(*e.rhs, m, rho);
      if (!a || !b) return std::nullopt;
      return e.kind == Expr::Kind::Add ? *a + *b : *a * *b;
    }
  }
  return std::nullopt;
}

namespace {

// Ways of dividing one cell between left and right: nullopt means absent.
std::vector<std::pair<std::optional<Cell>, std::optional<Cell>>> cell_splits(const Cell& c,
                                                                              const std::vector<Perm>& perms) {
  std::vector<std::pair<std::optional<Cell>, std::optional<Cell>>> out;
  out.emplace_back(std::nullopt, c);
  for (Perm a : perms) {
    if (!(a < c.perm)) continue;
    auto b = perm_sub(c.perm, a);
    if (!b || std::find(perms.begin(), perms.end(), *b) == perms.end()) continue;
    out.emplace_back(Cell{c.value, a}, Cell{c.value, *b});
  }
  out.emplace_back(c, std::nullopt);
  return out;
}

}  // namespace

std::vector<std::pair<LogicalState, LogicalState>> substates(const LogicalState& s, const std::vector<Perm>& perms) {
  std::vector<std::pair<LogicalState, LogicalState>> out{{LogicalState{}, LogicalState{}}};
  auto extend = [&](auto&& place) {
    return [&, place](const auto& key, const Cell& c) {
      std::vector<std::pair<LogicalState, LogicalState>> next;
      for (const auto& [l, r] : cell_splits(c, perms)) {
        for (const auto& [a, b] : out) {
          auto a2 = a;
          auto b2 = b;
          if (l) place(a2, key, *l);
          if (r) place(b2, key, *r);
          next.emplace_back(std::move(a2), std::move(b2));
        }
      }
      out = std::move(next);
    };
  };
  auto on_stack = extend([](LogicalState& x, const std::string& k, const Cell& c) { x.stack[k] = c; });
  auto on_heap = extend([](LogicalState& x, Value k, const Cell& c) { x.heap[k] = c; });
  for (const auto& [k, c] : s.stack) on_stack(k, c);
  for (const auto& [k, c] : s.heap) on_heap(k, c);
  return out;
}

std::vector<Value> value_domain(const Universe& u) {
  std::vector<Value> vs = u.values();
  for (Value l : u.locs)
    if (l < u.lo || l > u.hi) vs.push_back(l);
  return vs;
}

namespace {

class Judge {
 public:
  Judge(MemoryState ambient, const Universe& u) : u_(u), ambient_(std::move(ambient)) {}

  bool sat(const LogicalState& s, const Formula& f, Valuation& rho) const {
    switch (f.kind) {
      case Formula::Kind::Emp:
        return s.empty();
      case Formula::Kind::True:
        return true;
      case Formula::Kind::False:
        return false;
      case Formula::Kind::Or:
        return sat(s, *f.lhs, rho) || sat(s, *f.rhs, rho);
      case Formula::Kind::And:
        return sat(s, *f.lhs, rho) && sat(s, *f.rhs, rho);
      case Formula::Kind::Implies:
        return !sat(s, *f.lhs, rho) || sat(s, *f.rhs, rho);
      case Formula::Kind::Not:
        return !sat(s, *f.lhs, rho);
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        const bool all = f.kind == Formula::Kind::Forall;
        auto saved = rho.find(f.name) == rho.end() ? std::nullopt : std::optional<Value>(rho[f.name]);
        bool result = all;
        for (Value v : value_domain(u_)) {
          rho[f.name] = v;
          if (sat(s, *f.lhs, rho) != all) {
            result = !all;
            break;
          }
        }
        if (saved)
          rho[f.name] = *saved;
        else
          rho.erase(f.name);
        return result;
      }
      case Formula::Kind::Star:
        for (const auto& [a, b] : substates(s, u_.perms))
          if (sat(a, *f.lhs, rho) && sat(b, *f.rhs, rho)) return true;
        return false;
      case Formula::Kind::Own: {
        auto it = s.stack.find(f.name);
        return it != s.stack.end() && it->second.perm == f.perm;
      }
      case Formula::Kind::OwnAny:
        return s.stack.count(f.name) > 0;
      case Formula::Kind::PointsTo: {
        auto l = eval_logical(*f.e1, ambient_, rho);
        auto v = eval_logical(*f.e2, ambient_, rho);
        if (!l || !v) return false;
        auto it = s.heap.find(*l);
        return it != s.heap.end() && it->second.value == *v && it->second.perm == f.perm;
      }
      case Formula::Kind::Eq: {
        auto a = eval_logical(*f.e1, ambient_, rho);
        auto b = eval_logical(*f.e2, ambient_, rho);
        return a && b && *a == *b;
      }
    }
    return false;
  }

 private:
  const Universe& u_;
  MemoryState ambient_;
};

void formula_keys(const Formula& f, std::set<std::string>& vars, bool& heap) {
  auto from = [&](const ExprPtr& e) {
    if (e) collect_program_vars(*e, vars);
  };
  switch (f.kind) {
    case Formula::Kind::Own:
    case Formula::Kind::OwnAny:
      vars.insert(f.name);
      return;
    case Formula::Kind::PointsTo:
      heap = true;
      from(f.e1);
      from(f.e2);
      return;
    case Formula::Kind::Eq:
      from(f.e1);
      from(f.e2);
      return;
    default:
      if (f.lhs) formula_keys(*f.lhs, vars, heap);
      if (f.rhs) formula_keys(*f.rhs, vars, heap);
  }
}

template <class K>
void all_maps(const std::vector<K>& keys, std::size_t i, std::map<K, Cell>& cur, const std::vector<Cell>& cells,
              std::vector<std::map<K, Cell>>& out) {
  if (i == keys.size()) {
    out.push_back(cur);
    return;
  }
  all_maps(keys, i + 1, cur, cells, out);
  for (const auto& c : cells) {
    cur[keys[i]] = c;
    all_maps(keys, i + 1, cur, cells, out);
  }
  cur.erase(keys[i]);
}

}  // namespace

bool satisfies(const LogicalState& s, const Formula& f, const Valuation& rho, const Universe& u) {
  Valuation r = rho;
  return Judge(erase(s), u).sat(s, f, r);
}

bool satisfies_in(const MemoryState& ambient, const LogicalState& s, const Formula& f, const Valuation& rho,
                  const Universe& u) {
  Valuation r = rho;
  return Judge(ambient, u).sat(s, f, r);
}

std::vector<LogicalState> scope_states(const std::vector<const Formula*>& fs, const Universe& u) {
  std::set<std::string> vars;
  bool heap = false;
  for (const Formula* f : fs) formula_keys(*f, vars, heap);
  std::vector<std::string> var_list(vars.begin(), vars.end());
  for (const auto& v : u.vars)
    if (!vars.count(v)) {
      var_list.push_back(v);
      break;
    }
  std::vector<Value> loc_list;
  if (heap)
    loc_list = u.locs;
  else if (!u.locs.empty())
    loc_list.push_back(u.locs.front());

  std::vector<Cell> cells;
  for (Value v : value_domain(u))
    for (Perm p : u.perms) cells.push_back(Cell{v, p});
  std::vector<std::map<std::string, Cell>> stacks;
  std::vector<std::map<Value, Cell>> heaps;
  std::map<std::string, Cell> s;
  std::map<Value, Cell> h;
  all_maps(var_list, 0, s, cells, stacks);
  all_maps(loc_list, 0, h, cells, heaps);
  std::vector<LogicalState> out;
  out.reserve(stacks.size() * heaps.size());
  for (const auto& st : stacks)
    for (const auto& hp : heaps) out.push_back(LogicalState{st, hp});
  return out;
}

std::vector<Valuation> valuations(const std::set<std::string>& vars, const Universe& u) {
  std::vector<Valuation> out{Valuation{}};
  const auto dom = value_domain(u);
  for (const auto& x : vars) {
    std::vector<Valuation> next;
    for (const auto& rho : out)
      for (Value v : dom) {
        auto r = rho;
        r[x] = v;
        next.push_back(std::move(r));
      }
    out = std::move(next);
  }
  return out;
}

bool is_precise(const Formula& p, const Universe& u) {
  std::set<std::string> free;
  collect_free_logical_vars(p, free);
  const auto rhos = valuations(free, u);
  for (const auto& s : scope_states({&p}, u)) {
    for (const auto& rho : rhos) {
      std::optional<LogicalState> found;
      for (const auto& [a, b] : substates(s, u.perms)) {
        if (!satisfies(a, p, rho, u)) continue;
        if (found && *found != a) return false;
        found = a;
      }
    }
  }
  return true;
}

bool entails(const Formula& p, const Formula& q, const Universe& u) {
  std::set<std::string> free;
  collect_free_logical_vars(p, free);
  collect_free_logical_vars(q, free);
  const auto rhos = valuations(free, u);
  for (const auto& s : scope_states({&p, &q}, u))
    for (const auto& rho : rhos)
      if (satisfies(s, p, rho, u) && !satisfies(s, q, rho, u)) return false;
  return true;
}

FormulaPtr def_formula(const BExpr& b) {
  std::set<std::string> vars;
  collect_program_vars(b, vars);
  FormulaPtr out;
  for (const auto& x : vars) out = out ? Formula::conj(out, Formula::own_any(x)) : Formula::own_any(x);
  return out ? out : Formula::truth(true);
}

}  // namespace sepgame
