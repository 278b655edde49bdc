#include "sepgame/state.hpp"

#include <cctype>
#include <charconv>

#include "sepgame/parser.hpp"

namespace sepgame {

namespace {

template <class K>
bool merge_cells(const std::map<K, Cell>& a, const std::map<K, Cell>& b, std::map<K, Cell>& out) {
  out = a;
  for (const auto& [k, cell] : b) {
    auto [it, fresh] = out.emplace(k, cell);
    if (fresh) continue;
    if (it->second.value != cell.value) return false;
    auto sum = perm_add(it->second.perm, cell.perm);
    if (!sum) return false;
    it->second.perm = *sum;
  }
  return true;
}

std::string key_str(const std::string& k) { return k; }
std::string key_str(Value k) { return std::to_string(k); }

template <class M, class F>
std::string braces(const char* tag, const M& m, F value) {
  std::string out = tag;
  out += "{";
  bool first = true;
  for (const auto& [k, v] : m) {
    if (!first) out += ",";
    first = false;
    out += key_str(k) + "=" + value(v);
  }
  return out + "}";
}

}  // namespace

std::optional<LogicalState> tensor(const LogicalState& a, const LogicalState& b) {
  LogicalState out;
  if (!merge_cells(a.stack, b.stack, out.stack)) return std::nullopt;
  if (!merge_cells(a.heap, b.heap, out.heap)) return std::nullopt;
  return out;
}

MemoryState erase(const LogicalState& s) {
  MemoryState m;
  for (const auto& [k, c] : s.stack) m.stack.emplace(k, c.value);
  for (const auto& [k, c] : s.heap) m.heap.emplace(k, c.value);
  return m;
}

std::string to_string(const MemoryState& m) {
  auto plain = [](Value v) { return std::to_string(v); };
  return braces("s", m.stack, plain) + " " + braces("h", m.heap, plain);
}

std::string to_string(const MachineState& m) {
  std::string out = to_string(m.mem) + " L{";
  bool first = true;
  for (const auto& r : m.locked) {
    if (!first) out += ",";
    first = false;
    out += r;
  }
  return out + "}";
}

std::string to_string(const LogicalState& s) {
  auto cell = [](const Cell& c) { return std::to_string(c.value) + "@" + c.perm.str(); };
  return braces("s", s.stack, cell) + " " + braces("h", s.heap, cell);
}

namespace {

// Reader for the bracketed state notation above.
class StateReader {
 public:
  explicit StateReader(const std::string& t) : text_(t) {}

  void skip_ws() {
    while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " in state '" + text_ + "'", 1, static_cast<int>(i_) + 1);
  }

  void expect(char c) {
    skip_ws();
    if (i_ >= text_.size() || text_[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  bool peek(char c) {
    skip_ws();
    return i_ < text_.size() && text_[i_] == c;
  }

  bool done() {
    skip_ws();
    return i_ >= text_.size();
  }

  std::string token() {
    skip_ws();
    std::size_t j = i_;
    while (j < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_' ||
                                text_[j] == '-' || text_[j] == '/'))
      ++j;
    if (j == i_) fail("expected a token");
    std::string out = text_.substr(i_, j - i_);
    i_ = j;
    return out;
  }

  Value number() {
    std::string t = token();
    Value v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) fail("expected an integer, got '" + t + "'");
    return v;
  }

  Cell cell() {
    Cell c;
    c.value = number();
    expect('@');
    auto p = parse_perm(token());
    if (!p) fail("bad permission");
    c.perm = *p;
    return c;
  }

  // tag{ k=v, ... }; calls entry(key) for each element
  template <class F>
  void section(char tag, F entry) {
    expect(tag);
    expect('{');
    if (peek('}')) {
      ++i_;
      return;
    }
    for (;;) {
      entry();
      if (peek(',')) {
        ++i_;
        continue;
      }
      expect('}');
      return;
    }
  }

 private:
  const std::string& text_;
  std::size_t i_ = 0;
};

}  // namespace

MachineState parse_machine_state(const std::string& text) {
  StateReader r(text);
  MachineState m;
  r.section('s', [&] {
    auto k = r.token();
    r.expect('=');
    m.mem.stack[k] = r.number();
  });
  r.section('h', [&] {
    auto k = r.number();
    r.expect('=');
    m.mem.heap[k] = r.number();
  });
  if (!r.done()) r.section('L', [&] { m.locked.insert(r.token()); });
  if (!r.done()) r.fail("trailing input");
  return m;
}

LogicalState parse_logical_state(const std::string& text) {
  StateReader r(text);
  LogicalState s;
  r.section('s', [&] {
    auto k = r.token();
    r.expect('=');
    s.stack[k] = r.cell();
  });
  r.section('h', [&] {
    auto k = r.number();
    r.expect('=');
    s.heap[k] = r.cell();
  });
  if (!r.done()) r.fail("trailing input");
  return s;
}

}  // namespace sepgame
