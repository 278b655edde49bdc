#include "sepgame/universe.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "sepgame/parser.hpp"

namespace sepgame {

std::string to_string(const EnvMove& m) {
  switch (m.kind) {
    case EnvMove::Kind::Assign:
      return m.name + ":=" + std::to_string(m.value);
    case EnvMove::Kind::Store:
      return "[" + std::to_string(m.loc) + "]:=" + std::to_string(m.value);
    case EnvMove::Kind::Acquire:
      return "+" + m.name;
    case EnvMove::Kind::Release:
      return "-" + m.name;
  }
  return {};
}

std::optional<MachineState> apply_env_move(const MachineState& s, const EnvMove& m) {
  MachineState out = s;
  switch (m.kind) {
    case EnvMove::Kind::Assign:
      out.mem.stack[m.name] = m.value;
      return out;
    case EnvMove::Kind::Store:
      if (!out.mem.heap.count(m.loc)) return std::nullopt;
      out.mem.heap[m.loc] = m.value;
      return out;
    case EnvMove::Kind::Acquire:
      if (!out.locked.insert(m.name).second) return std::nullopt;
      return out;
    case EnvMove::Kind::Release:
      if (!out.locked.erase(m.name)) return std::nullopt;
      return out;
  }
  return std::nullopt;
}

std::vector<Value> Universe::values() const {
  std::vector<Value> out;
  for (Value v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

bool Universe::is_loc(Value v) const { return std::find(locs.begin(), locs.end(), v) != locs.end(); }

bool Universe::writable(Value v) const { return (v >= lo && v <= hi) || is_loc(v); }

std::string Universe::describe() const {
  std::ostringstream os;
  auto join = [&](const auto& xs, auto f) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + f(xs[i]);
    return s;
  };
  auto id = [](const std::string& s) { return s; };
  auto num = [](Value v) { return std::to_string(v); };
  os << "vars=" << join(vars, id) << "; locs=" << join(locs, num) << "; vals=" << lo << ".." << hi
     << "; perms=" << join(perms, [](Perm p) { return p.str(); }) << "; locks=" << join(locks, id)
     << "; maxlen=" << maxlen << "; env="
     << (env == EnvPolicy::Passive ? "passive" : env == EnvPolicy::Moves ? "moves" : "exhaustive");
  return os.str();
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

Value to_value(const std::string& s, int line) {
  Value v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("expected integer '" + s + "'", line, 1);
  return v;
}

EnvMove parse_env_move(const std::string& s, int line) {
  EnvMove m;
  if (s.size() > 1 && (s[0] == '+' || s[0] == '-')) {
    m.kind = s[0] == '+' ? EnvMove::Kind::Acquire : EnvMove::Kind::Release;
    m.name = s.substr(1);
    return m;
  }
  auto pos = s.find(":=");
  if (pos == std::string::npos) throw ParseError("bad environment move '" + s + "'", line, 1);
  std::string lhs = trim(s.substr(0, pos));
  m.value = to_value(trim(s.substr(pos + 2)), line);
  if (lhs.size() > 2 && lhs.front() == '[' && lhs.back() == ']') {
    m.kind = EnvMove::Kind::Store;
    m.loc = to_value(trim(lhs.substr(1, lhs.size() - 2)), line);
  } else {
    m.kind = EnvMove::Kind::Assign;
    m.name = lhs;
  }
  return m;
}

}  // namespace

Universe parse_universe(const std::string& text) {
  Universe u;
  bool have_vals = false;
  bool have_perms = false;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::string l = trim(raw);
    if (l.empty()) continue;
    auto eq = l.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line, 1);
    std::string key = trim(l.substr(0, eq));
    std::string val = trim(l.substr(eq + 1));
    if (key == "vars") {
      u.vars = split_list(val);
      for (const auto& v : u.vars)
        if (is_logical_var(v)) throw ParseError("program variable '" + v + "' must not be capitalised", line, 1);
    } else if (key == "locs") {
      u.locs.clear();
      for (const auto& v : split_list(val)) u.locs.push_back(to_value(v, line));
    } else if (key == "vals") {
      auto dots = val.find("..");
      if (dots == std::string::npos) throw ParseError("vals expects lo..hi", line, 1);
      u.lo = to_value(trim(val.substr(0, dots)), line);
      u.hi = to_value(trim(val.substr(dots + 2)), line);
      have_vals = true;
    } else if (key == "perms") {
      u.perms.clear();
      for (const auto& p : split_list(val)) {
        auto perm = parse_perm(p);
        if (!perm) throw ParseError("permission '" + p + "' outside (0,1]", line, 1);
        u.perms.push_back(*perm);
      }
      std::sort(u.perms.begin(), u.perms.end());
      u.perms.erase(std::unique(u.perms.begin(), u.perms.end()), u.perms.end());
      have_perms = true;
    } else if (key == "locks") {
      u.locks = split_list(val);
    } else if (key == "maxlen") {
      u.maxlen = static_cast<std::size_t>(to_value(val, line));
    } else if (key == "env") {
      if (val == "passive")
        u.env = EnvPolicy::Passive;
      else if (val == "moves")
        u.env = EnvPolicy::Moves;
      else if (val == "exhaustive")
        u.env = EnvPolicy::Exhaustive;
      else
        throw ParseError("unknown env policy '" + val + "'", line, 1);
    } else if (key == "envmoves") {
      for (const auto& m : split_list(val)) u.env_moves.push_back(parse_env_move(m, line));
    } else if (key == "init") {
      u.inits.push_back(parse_logical_state(val));
    } else {
      throw ParseError("unknown key '" + key + "'", line, 1);
    }
  }
  if (u.vars.empty()) throw ParseError("empty variable alphabet", line, 1);
  if (!have_vals || u.lo > u.hi) throw ParseError("empty value range", line, 1);
  if (!have_perms || u.perms.empty()) throw ParseError("empty permission set", line, 1);
  if (std::find(u.perms.begin(), u.perms.end(), Perm::full()) == u.perms.end())
    throw ParseError("permission set must contain 1", line, 1);
  std::sort(u.locs.begin(), u.locs.end());
  std::sort(u.locks.begin(), u.locks.end());
  return u;
}

namespace {

template <class K, class V, class Gen>
void product(const std::vector<K>& keys, std::size_t i, std::map<K, V>& cur, const std::vector<V>& choices,
             Gen& emit) {
  if (i == keys.size()) {
    emit(cur);
    return;
  }
  product(keys, i + 1, cur, choices, emit);
  for (const auto& c : choices) {
    cur[keys[i]] = c;
    product(keys, i + 1, cur, choices, emit);
  }
  cur.erase(keys[i]);
}

std::vector<Value> stored_values(const Universe& u) {
  std::vector<Value> vs = u.values();
  for (Value l : u.locs)
    if (l < u.lo || l > u.hi) vs.push_back(l);
  return vs;
}

}  // namespace

std::vector<MachineState> all_machine_states(const Universe& u) {
  const auto vs = stored_values(u);
  std::vector<std::map<std::string, Value>> stacks;
  std::vector<std::map<Value, Value>> heaps;
  {
    std::map<std::string, Value> cur;
    auto emit = [&](const auto& m) { stacks.push_back(m); };
    product(u.vars, 0, cur, vs, emit);
  }
  {
    std::map<Value, Value> cur;
    auto emit = [&](const auto& m) { heaps.push_back(m); };
    product(u.locs, 0, cur, vs, emit);
  }
  std::vector<MachineState> out;
  const std::size_t nlocks = u.locks.size();
  for (const auto& s : stacks)
    for (const auto& h : heaps)
      for (std::size_t mask = 0; mask < (std::size_t{1} << nlocks); ++mask) {
        MachineState m;
        m.mem.stack = s;
        m.mem.heap = h;
        for (std::size_t i = 0; i < nlocks; ++i)
          if (mask & (std::size_t{1} << i)) m.locked.insert(u.locks[i]);
        out.push_back(std::move(m));
      }
  return out;
}

std::vector<LogicalState> all_logical_states(const Universe& u) {
  std::vector<Cell> cells;
  for (Value v : stored_values(u))
    for (Perm p : u.perms) cells.push_back(Cell{v, p});
  std::vector<std::map<std::string, Cell>> stacks;
  std::vector<std::map<Value, Cell>> heaps;
  {
    std::map<std::string, Cell> cur;
    auto emit = [&](const auto& m) { stacks.push_back(m); };
    product(u.vars, 0, cur, cells, emit);
  }
  {
    std::map<Value, Cell> cur;
    auto emit = [&](const auto& m) { heaps.push_back(m); };
    product(u.locs, 0, cur, cells, emit);
  }
  std::vector<LogicalState> out;
  out.reserve(stacks.size() * heaps.size());
  for (const auto& s : stacks)
    for (const auto& h : heaps) out.push_back(LogicalState{s, h});
  return out;
}

}  // namespace sepgame
