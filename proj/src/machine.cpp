#include "sepgame/machine.hpp"

#include <algorithm>

#include "sepgame/parser.hpp"

namespace sepgame {

Instr Instr::of_command(const Command& c) {
  Instr m;
  m.name = c.name;
  m.e1 = c.e1;
  m.e2 = c.e2;
  switch (c.kind) {
    case Command::Kind::Assign:
      m.kind = Kind::Assign;
      break;
    case Command::Kind::Load:
      m.kind = Kind::Load;
      break;
    case Command::Kind::Store:
      m.kind = Kind::Store;
      break;
    case Command::Kind::Alloc:
      m.kind = Kind::Alloc;
      break;
    case Command::Kind::Dispose:
      m.kind = Kind::Dispose;
      break;
    case Command::Kind::Skip:
      return Instr::nop();
    default:
      throw std::invalid_argument("not an atomic command: " + to_string(c));
  }
  return m;
}

int compare(const Instr& a, const Instr& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (int c = a.name.compare(b.name)) return c < 0 ? -1 : 1;
  auto cmp = [](const ExprPtr& x, const ExprPtr& y) {
    if (!x || !y) return x ? 1 : (y ? -1 : 0);
    return compare(*x, *y);
  };
  if (int c = cmp(a.e1, b.e1)) return c;
  return cmp(a.e2, b.e2);
}

std::string to_string(const Instr& m) {
  switch (m.kind) {
    case Instr::Kind::Nop:
      return "nop";
    case Instr::Kind::Assign:
      return m.name + " := " + to_string(*m.e1);
    case Instr::Kind::Load:
      return m.name + " := [" + to_string(*m.e1) + "]";
    case Instr::Kind::Store:
      return "[" + to_string(*m.e1) + "] := " + to_string(*m.e2);
    case Instr::Kind::Alloc:
      return m.name + " := alloc(" + to_string(*m.e1) + ")";
    case Instr::Kind::Dispose:
      return "dispose(" + to_string(*m.e1) + ")";
    case Instr::Kind::Acquire:
      return "P(" + m.name + ")";
    case Instr::Kind::Release:
      return "V(" + m.name + ")";
  }
  return {};
}

Instr parse_instr(const std::string& text) {
  if (text == "nop") return Instr::nop();
  if (text.size() > 3 && (text[0] == 'P' || text[0] == 'V') && text[1] == '(' && text.back() == ')') {
    std::string r = text.substr(2, text.size() - 3);
    return text[0] == 'P' ? Instr::acquire(r) : Instr::release(r);
  }
  auto c = parse_program(text);
  if (c->kind == Command::Kind::Skip) throw ParseError("'skip' is not an instruction; use nop", 1, 1);
  try {
    return Instr::of_command(*c);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

std::optional<Value> eval(const Expr& e, const MemoryState& m) {
  switch (e.kind) {
    case Expr::Kind::Lit:
      return e.value;
    case Expr::Kind::Var: {
      auto it = m.stack.find(e.name);
      if (it == m.stack.end()) return std::nullopt;
      return it->second;
    }
    case Expr::Kind::Add:
    case Expr::Kind::Mul: {
      auto a = eval(*e.lhs, m);
      auto b = eval(*e.rhs, m);
      if (!a || !b) return std::nullopt;
      return e.kind == Expr::Kind::Add ? *a + *b : *a * *b;
    }
  }
  return std::nullopt;
}

std::optional<bool> eval_bool(const BExpr& b, const MemoryState& m) {
  switch (b.kind) {
    case BExpr::Kind::True:
      return true;
    case BExpr::Kind::False:
      return false;
    case BExpr::Kind::Eq: {
      auto l = eval(*b.left, m);
      auto r = eval(*b.right, m);
      if (!l || !r) return std::nullopt;
      return *l == *r;
    }
    case BExpr::Kind::And:
    case BExpr::Kind::Or: {
      // strict: both sides must be defined
      auto l = eval_bool(*b.lhs, m);
      auto r = eval_bool(*b.rhs, m);
      if (!l || !r) return std::nullopt;
      return b.kind == BExpr::Kind::And ? (*l && *r) : (*l || *r);
    }
  }
  return std::nullopt;
}

std::vector<StepOutcome> machine_step(const MachineState& s, const Instr& m, const Universe& u) {
  const std::vector<StepOutcome> error{StepOutcome{true, s}};
  auto ok = [](MachineState post) { return std::vector<StepOutcome>{StepOutcome{false, std::move(post)}}; };
  switch (m.kind) {
    case Instr::Kind::Nop:
      return ok(s);
    case Instr::Kind::Assign: {
      auto v = eval(*m.e1, s.mem);
      if (!v || !u.writable(*v)) return error;
      MachineState t = s;
      t.mem.stack[m.name] = *v;
      return ok(std::move(t));
    }
    case Instr::Kind::Load: {
      auto l = eval(*m.e1, s.mem);
      if (!l) return error;
      auto it = s.mem.heap.find(*l);
      if (it == s.mem.heap.end()) return error;
      MachineState t = s;
      t.mem.stack[m.name] = it->second;
      return ok(std::move(t));
    }
    case Instr::Kind::Store: {
      auto l = eval(*m.e1, s.mem);
      auto v = eval(*m.e2, s.mem);
      if (!l || !v || !u.writable(*v) || !s.mem.heap.count(*l)) return error;
      MachineState t = s;
      t.mem.heap[*l] = *v;
      return ok(std::move(t));
    }
    case Instr::Kind::Alloc: {
      auto v = eval(*m.e1, s.mem);
      if (!v || !u.writable(*v)) return error;
      std::vector<StepOutcome> out;
      for (Value l : u.locs) {
        if (s.mem.heap.count(l)) continue;
        MachineState t = s;
        t.mem.heap[l] = *v;
        t.mem.stack[m.name] = l;
        out.push_back(StepOutcome{false, std::move(t)});
      }
      return out;
    }
    case Instr::Kind::Dispose: {
      auto l = eval(*m.e1, s.mem);
      if (!l || !s.mem.heap.count(*l)) return error;
      MachineState t = s;
      t.mem.heap.erase(*l);
      return ok(std::move(t));
    }
    case Instr::Kind::Acquire: {
      if (s.locked.count(m.name)) return {};
      MachineState t = s;
      t.locked.insert(m.name);
      return ok(std::move(t));
    }
    case Instr::Kind::Release: {
      if (!s.locked.count(m.name)) return {};
      MachineState t = s;
      t.locked.erase(m.name);
      return ok(std::move(t));
    }
  }
  return {};
}

std::set<std::string> locks_plus(const Instr& m) {
  if (m.kind == Instr::Kind::Acquire) return {m.name};
  return {};
}

std::set<std::string> locks_minus(const Instr& m) {
  if (m.kind == Instr::Kind::Release) return {m.name};
  return {};
}

std::set<std::string> locks(const Instr& m) {
  if (m.is_lock()) return {m.name};
  return {};
}

void collect_instrs(const Command& c, std::vector<Instr>& out) {
  switch (c.kind) {
    case Command::Kind::Assign:
    case Command::Kind::Load:
    case Command::Kind::Store:
    case Command::Kind::Alloc:
    case Command::Kind::Dispose: {
      Instr m = Instr::of_command(c);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
      return;
    }
    default:
      if (c.c1) collect_instrs(*c.c1, out);
      if (c.c2) collect_instrs(*c.c2, out);
  }
}

}  // namespace sepgame
