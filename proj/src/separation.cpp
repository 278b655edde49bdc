#include "sepgame/separation.hpp"

#include <stdexcept>

namespace sepgame {

namespace {

using Share = std::optional<Perm>;  // nullopt: the party holds nothing

std::optional<Share> add_share(Share a, Share b) {
  if (!a) return b;
  if (!b) return a;
  auto s = perm_add(*a, *b);
  if (!s) return std::nullopt;
  return Share(*s);
}

// Every assignment of shares to the parties on top of `used`, keeping the
// total defined and the key present somewhere.
void share_options(std::size_t parties, Share used, const std::vector<Perm>& perms, std::vector<Share>& cur,
                   std::vector<std::vector<Share>>& out) {
  if (cur.size() == parties) {
    if (used) out.push_back(cur);
    return;
  }
  cur.push_back(std::nullopt);
  share_options(parties, used, perms, cur, out);
  cur.pop_back();
  for (Perm p : perms) {
    auto total = add_share(used, p);
    if (!total) continue;
    cur.push_back(p);
    share_options(parties, *total, perms, cur, out);
    cur.pop_back();
  }
}

// Shares already taken by the fixed parts for one key; nullopt when they
// disagree with the target value or overflow.
template <class K, class Get>
std::optional<Share> fixed_share(const std::vector<const LogicalState*>& fixed, const K& key, Value v, Get get) {
  Share used;
  for (const LogicalState* f : fixed) {
    const auto& m = get(*f);
    auto it = m.find(key);
    if (it == m.end()) continue;
    if (it->second.value != v) return std::nullopt;
    auto t = add_share(used, it->second.perm);
    if (!t) return std::nullopt;
    used = *t;
  }
  return used;
}

}  // namespace

std::set<std::string> SeparatedState::dom() const {
  std::set<std::string> out;
  for (const auto& [r, slot] : resources)
    if (slot.kind == ResourceSlot::Kind::Available) out.insert(r);
  return out;
}

std::set<std::string> SeparatedState::dom_code() const {
  std::set<std::string> out;
  for (const auto& [r, slot] : resources)
    if (slot.kind == ResourceSlot::Kind::HeldByCode) out.insert(r);
  return out;
}

std::set<std::string> SeparatedState::dom_frame() const {
  std::set<std::string> out;
  for (const auto& [r, slot] : resources)
    if (slot.kind == ResourceSlot::Kind::HeldByFrame) out.insert(r);
  return out;
}

std::optional<LogicalState> big_tensor(const SeparatedState& s) {
  std::optional<LogicalState> acc = s.code;
  for (const auto& [r, slot] : s.resources) {
    if (slot.kind != ResourceSlot::Kind::Available) continue;
    acc = tensor(*acc, slot.state);
    if (!acc) return std::nullopt;
  }
  return tensor(*acc, s.frame);
}

bool well_formed(const SeparatedState& s) { return big_tensor(s).has_value(); }

MachineState combine(const SeparatedState& s) {
  auto t = big_tensor(s);
  if (!t) throw std::invalid_argument("separated state does not combine: " + to_string(s));
  MachineState out{erase(*t), s.dom_code()};
  for (const auto& r : s.dom_frame()) out.locked.insert(r);
  return out;
}

bool legal_eve_move(const SeparatedState& s, const Instr& m, const SeparatedState& next, const Universe& u) {
  if (s.frame != next.frame || !well_formed(s) || !well_formed(next)) return false;
  if (s.resources.size() != next.resources.size()) return false;
  const auto target = combine(next);
  bool returns = false;
  for (const auto& o : machine_step(combine(s), m, u)) returns = returns || (!o.error && o.post == target);
  if (!returns) return false;
  const auto plus = locks_plus(m);
  const auto minus = locks_minus(m);
  for (const auto& [r, slot] : s.resources) {
    auto it = next.resources.find(r);
    if (it == next.resources.end()) return false;
    const auto& after = it->second;
    if (plus.count(r)) {
      if (slot.kind != ResourceSlot::Kind::Available || after.kind != ResourceSlot::Kind::HeldByCode) return false;
    } else if (minus.count(r)) {
      if (slot.kind != ResourceSlot::Kind::HeldByCode || after.kind != ResourceSlot::Kind::Available) return false;
    } else if (slot != after) {
      return false;
    }
  }
  for (const auto& r : locks(m))
    if (!s.resources.count(r)) return false;
  return true;
}

bool legal_adam_move(const SeparatedState& s, const SeparatedState& next) {
  if (s.code != next.code || s.dom_code() != next.dom_code() || !well_formed(next)) return false;
  for (const auto& [r, slot] : s.resources)
    if (!next.resources.count(r)) return false;
  return s.resources.size() == next.resources.size();
}

bool permission_conserving(const SeparatedState& s, const SeparatedState& next) {
  auto a = big_tensor(s);
  auto b = big_tensor(next);
  if (!a || !b) return false;
  auto same_keys = [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    for (const auto& [k, c] : x) {
      auto it = y.find(k);
      if (it == y.end() || it->second.perm != c.perm) return false;
    }
    return true;
  };
  return same_keys(a->stack, b->stack) && same_keys(a->heap, b->heap);
}

std::vector<std::vector<LogicalState>> completions(const MemoryState& target,
                                                   const std::vector<const LogicalState*>& fixed,
                                                   std::size_t parties, const std::vector<Perm>& perms) {
  for (const LogicalState* f : fixed) {
    for (const auto& [k, c] : f->stack)
      if (!target.stack.count(k)) return {};
    for (const auto& [k, c] : f->heap)
      if (!target.heap.count(k)) return {};
  }
  std::vector<std::vector<LogicalState>> out{std::vector<LogicalState>(parties)};
  auto extend = [&](auto place, auto get, const auto& key, Value v) {
    auto used = fixed_share(fixed, key, v, get);
    if (!used) {
      out.clear();
      return;
    }
    std::vector<std::vector<Share>> opts;
    std::vector<Share> cur;
    share_options(parties, *used, perms, cur, opts);
    std::vector<std::vector<LogicalState>> next;
    next.reserve(out.size() * opts.size());
    for (const auto& o : opts)
      for (const auto& partial : out) {
        auto x = partial;
        for (std::size_t i = 0; i < parties; ++i)
          if (o[i]) place(x[i], key, Cell{v, *o[i]});
        next.push_back(std::move(x));
      }
    out = std::move(next);
  };
  auto stack_of = [](const LogicalState& s) -> const std::map<std::string, Cell>& { return s.stack; };
  auto heap_of = [](const LogicalState& s) -> const std::map<Value, Cell>& { return s.heap; };
  auto put_stack = [](LogicalState& s, const std::string& k, const Cell& c) { s.stack[k] = c; };
  auto put_heap = [](LogicalState& s, Value k, const Cell& c) { s.heap[k] = c; };
  for (const auto& [k, v] : target.stack) {
    extend(put_stack, stack_of, k, v);
    if (out.empty()) return out;
  }
  for (const auto& [k, v] : target.heap) {
    extend(put_heap, heap_of, k, v);
    if (out.empty()) return out;
  }
  return out;
}

std::vector<SeparatedState> enumerate_eve_moves(const SeparatedState& s, const Instr& m, const MachineState& target,
                                                const Universe& u) {
  if (!well_formed(s)) return {};
  bool returns = false;
  for (const auto& o : machine_step(combine(s), m, u)) returns = returns || (!o.error && o.post == target);
  if (!returns) return {};
  const auto plus = locks_plus(m);
  const auto minus = locks_minus(m);
  SeparatedState base{{}, s.resources, s.frame};
  std::vector<std::string> released;
  for (const auto& r : locks(m)) {
    auto it = s.resources.find(r);
    if (it == s.resources.end()) return {};
    if (plus.count(r)) {
      if (it->second.kind != ResourceSlot::Kind::Available) return {};
      base.resources[r] = ResourceSlot::code();
    } else {
      if (it->second.kind != ResourceSlot::Kind::HeldByCode) return {};
      released.push_back(r);
    }
  }
  std::vector<const LogicalState*> fixed{&s.frame};
  for (const auto& [r, slot] : base.resources)
    if (slot.kind == ResourceSlot::Kind::Available) fixed.push_back(&slot.state);
  std::vector<SeparatedState> out;
  for (auto& parts : completions(target.mem, fixed, 1 + released.size(), u.perms)) {
    SeparatedState next = base;
    next.code = std::move(parts[0]);
    for (std::size_t i = 0; i < released.size(); ++i)
      next.resources[released[i]] = ResourceSlot::available(std::move(parts[i + 1]));
    if (combine(next) == target) out.push_back(std::move(next));
  }
  return out;
}

std::vector<SeparatedState> enumerate_adam_moves(const SeparatedState& s, const MachineState& target,
                                                 const Universe& u) {
  SeparatedState base{s.code, {}, {}};
  std::vector<std::string> avail;
  for (const auto& [r, slot] : s.resources) {
    if (slot.kind == ResourceSlot::Kind::HeldByCode) {
      if (!target.locked.count(r)) return {};
      base.resources[r] = slot;
    } else if (target.locked.count(r)) {
      base.resources[r] = ResourceSlot::frame();
    } else {
      avail.push_back(r);
    }
  }
  for (const auto& r : target.locked)
    if (!s.resources.count(r)) return {};
  std::vector<SeparatedState> out;
  for (auto& parts : completions(target.mem, {&s.code}, 1 + avail.size(), u.perms)) {
    SeparatedState next = base;
    next.frame = std::move(parts[0]);
    for (std::size_t i = 0; i < avail.size(); ++i)
      next.resources[avail[i]] = ResourceSlot::available(std::move(parts[i + 1]));
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<SeparatedState> enumerate_separations(const MachineState& target, const std::set<std::string>& alphabet,
                                                  const Universe& u) {
  for (const auto& r : target.locked)
    if (!alphabet.count(r)) return {};
  std::vector<std::string> held(target.locked.begin(), target.locked.end());
  std::vector<std::string> avail;
  for (const auto& r : alphabet)
    if (!target.locked.count(r)) avail.push_back(r);
  const auto parts_list = completions(target.mem, {}, 2 + avail.size(), u.perms);
  std::vector<SeparatedState> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << held.size()); ++mask) {
    SeparatedState base;
    for (std::size_t i = 0; i < held.size(); ++i)
      base.resources[held[i]] = (mask >> i) & 1 ? ResourceSlot::frame() : ResourceSlot::code();
    for (const auto& parts : parts_list) {
      SeparatedState s = base;
      s.code = parts[0];
      s.frame = parts[1];
      for (std::size_t i = 0; i < avail.size(); ++i) s.resources[avail[i]] = ResourceSlot::available(parts[i + 2]);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string to_string(const ResourceSlot& r) {
  switch (r.kind) {
    case ResourceSlot::Kind::HeldByCode:
      return "code";
    case ResourceSlot::Kind::HeldByFrame:
      return "frame";
    case ResourceSlot::Kind::Available:
      break;
  }
  return "(" + to_string(r.state) + ")";
}

std::string to_string(const SeparatedState& s) {
  std::string out = "C[" + to_string(s.code) + "] R[";
  bool first = true;
  for (const auto& [r, slot] : s.resources) {
    if (!first) out += "; ";
    first = false;
    out += r + ":" + to_string(slot);
  }
  return out + "] F[" + to_string(s.frame) + "]";
}

}  // namespace sepgame
