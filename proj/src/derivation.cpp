#include "sepgame/derivation.hpp"

#include <array>
#include <map>

#include "sepgame/parser.hpp"

namespace sepgame {

namespace {

struct RuleInfo {
  Rule rule;
  const char* tag;
  std::size_t arity;
};

constexpr std::array<RuleInfo, 15> kRules{{
    {Rule::Aff, "aff", 0},
    {Rule::Store, "store", 0},
    {Rule::Load, "load", 0},
    {Rule::Seq, "seq", 2},
    {Rule::If, "if", 2},
    {Rule::Conj, "conj", 2},
    {Rule::Res, "res", 1},
    {Rule::With, "with", 1},
    {Rule::Par, "par", 2},
    {Rule::Frame, "frame", 1},
    {Rule::ExtSkip, "ext-skip", 0},
    {Rule::ExtWhile, "ext-while", 1},
    {Rule::ExtConseq, "ext-conseq", 1},
    {Rule::ExtAlloc, "ext-alloc", 0},
    {Rule::ExtDispose, "ext-dispose", 0},
}};

const RuleInfo& info(Rule r) {
  for (const auto& i : kRules)
    if (i.rule == r) return i;
  throw std::logic_error("unknown rule");
}

template <class T, class F>
T read_text(const SExpr& e, F parse) {
  if (e.is_list) throw ParseError("expected a quoted term", e.line, e.col);
  try {
    return parse(e.text);
  } catch (const ParseError& err) {
    throw ParseError(std::string("in \"") + e.text + "\": " + err.what(), e.line, e.col);
  }
}

FormulaPtr formula_at(const SExpr& e) { return read_text<FormulaPtr>(e, parse_formula); }

Context context_at(const SExpr& e) {
  if (!e.is_list) throw ParseError(":ctx expects a list", e.line, e.col);
  Context out;
  for (const auto& entry : e.items) {
    if (!entry.is_list || entry.items.size() != 2 || entry.items[0].is_list || entry.items[0].quoted)
      throw ParseError("context entries look like (r \"J\")", entry.line, entry.col);
    const auto& name = entry.items[0].text;
    if (out.count(name)) throw ParseError("resource " + name + " bound twice", entry.line, entry.col);
    out[name] = formula_at(entry.items[1]);
  }
  return out;
}

struct Inherited {
  const Context* ctx = nullptr;
  CommandPtr cmd;
};

DerivationPtr build(const SExpr& e, const Inherited& from) {
  if (!e.is_list || e.items.empty() || e.items[0].is_list || e.items[0].quoted)
    throw ParseError("expected (rule ...)", e.line, e.col);
  auto rule = parse_rule(e.items[0].text);
  if (!rule) throw ParseError("unknown rule tag '" + e.items[0].text + "'", e.line, e.col);
  auto d = std::make_shared<Derivation>();
  d->rule = *rule;
  d->line = e.line;
  d->col = e.col;

  std::map<std::string, const SExpr*> fields;
  std::vector<const SExpr*> premises;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const auto& it = e.items[i];
    if (!it.is_list && !it.quoted && !it.text.empty() && it.text[0] == ':') {
      if (i + 1 >= e.items.size()) throw ParseError("missing value for " + it.text, it.line, it.col);
      if (!fields.emplace(it.text, &e.items[i + 1]).second)
        throw ParseError("duplicate field " + it.text, it.line, it.col);
      ++i;
    } else if (it.is_list) {
      premises.push_back(&it);
    } else {
      throw ParseError("stray atom '" + it.text + "'", it.line, it.col);
    }
  }
  if (premises.size() != arity(*rule))
    throw ParseError(to_string(*rule) + " takes " + std::to_string(arity(*rule)) + " premise(s), got " +
                         std::to_string(premises.size()),
                     e.line, e.col);

  auto take = [&](const char* key) -> const SExpr* {
    auto it = fields.find(key);
    if (it == fields.end()) return nullptr;
    const SExpr* v = it->second;
    fields.erase(it);
    return v;
  };
  auto need = [&](const char* key) {
    const SExpr* v = take(key);
    if (!v) throw ParseError(std::string("missing ") + key, e.line, e.col);
    return v;
  };

  if (const SExpr* c = take(":ctx"))
    d->concl.ctx = context_at(*c);
  else if (from.ctx)
    d->concl.ctx = *from.ctx;
  if (const SExpr* c = take(":cmd"))
    d->concl.cmd = read_text<CommandPtr>(*c, parse_program);
  else
    d->concl.cmd = from.cmd;
  if (!d->concl.cmd) throw ParseError("missing :cmd", e.line, e.col);
  d->concl.pre = formula_at(*need(":pre"));
  d->concl.post = formula_at(*need(":post"));
  if (const SExpr* v = take(":R")) d->frame = formula_at(*v);
  if (const SExpr* v = take(":J")) d->invariant = formula_at(*v);
  if (const SExpr* v = take(":inv")) d->invariant = formula_at(*v);
  if (const SExpr* v = take(":val")) d->val = read_text<ExprPtr>(*v, parse_expr);
  if (const SExpr* v = take(":perm")) {
    auto p = parse_perm(v->text);
    if (v->is_list || !p) throw ParseError("bad permission", v->line, v->col);
    d->perm = *p;
  }
  if (!fields.empty()) {
    const auto& [key, v] = *fields.begin();
    throw ParseError("unknown field " + key + " for " + to_string(*rule), v->line, v->col);
  }

  // what the premises inherit
  const Command& c = *d->concl.cmd;
  std::vector<CommandPtr> cmds(premises.size());
  std::vector<Context> ctxs(premises.size(), d->concl.ctx);
  switch (*rule) {
    case Rule::Seq:
      if (c.kind == Command::Kind::Seq) cmds = {c.c1, c.c2};
      break;
    case Rule::Par:
      if (c.kind == Command::Kind::Par) cmds = {c.c1, c.c2};
      break;
    case Rule::If:
      if (c.kind == Command::Kind::If) cmds = {c.c1, c.c2};
      break;
    case Rule::Res:
      if (c.kind == Command::Kind::Resource) {
        cmds = {c.c1};
        if (d->invariant) ctxs[0][c.name] = d->invariant;
      }
      break;
    case Rule::With:
      if (c.kind == Command::Kind::With) {
        cmds = {c.c1};
        ctxs[0].erase(c.name);
      }
      break;
    case Rule::ExtWhile:
      if (c.kind == Command::Kind::While) cmds = {c.c1};
      break;
    default:
      for (auto& x : cmds) x = d->concl.cmd;
  }
  for (std::size_t i = 0; i < premises.size(); ++i) d->kids.push_back(build(*premises[i], {&ctxs[i], cmds[i]}));
  return d;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '\\';
    out += ch;
  }
  return out + "\"";
}

void print(const Derivation& d, int depth, std::string& out) {
  const std::string pad(2 * depth, ' ');
  out += pad + "(" + to_string(d.rule) + " :ctx (";
  bool first = true;
  for (const auto& [r, j] : d.concl.ctx) {
    if (!first) out += ' ';
    first = false;
    out += "(" + r + " " + quote(to_string(*j)) + ")";
  }
  out += ")\n";
  out += pad + "  :pre " + quote(to_string(*d.concl.pre)) + "\n";
  out += pad + "  :cmd " + quote(to_string(*d.concl.cmd)) + "\n";
  out += pad + "  :post " + quote(to_string(*d.concl.post));
  if (d.frame) out += "\n" + pad + "  :R " + quote(to_string(*d.frame));
  if (d.invariant) out += "\n" + pad + (d.rule == Rule::ExtWhile ? "  :inv " : "  :J ") + quote(to_string(*d.invariant));
  if (d.val) out += "\n" + pad + "  :val " + quote(to_string(*d.val));
  if (d.rule == Rule::Load) out += "\n" + pad + "  :perm " + d.perm.str();
  for (const auto& k : d.kids) {
    out += "\n";
    print(*k, depth + 1, out);
  }
  out += ")";
}

}  // namespace

std::string to_string(Rule r) { return info(r).tag; }

std::optional<Rule> parse_rule(const std::string& tag) {
  for (const auto& i : kRules)
    if (tag == i.tag) return i.rule;
  return std::nullopt;
}

bool is_extension(Rule r) {
  switch (r) {
    case Rule::ExtSkip:
    case Rule::ExtWhile:
    case Rule::ExtConseq:
    case Rule::ExtAlloc:
    case Rule::ExtDispose:
      return true;
    default:
      return false;
  }
}

std::size_t arity(Rule r) { return info(r).arity; }

DerivationPtr parse_proof(const std::string& text) {
  auto top = parse_sexprs(text);
  if (top.size() != 1) throw ParseError("a proof script holds exactly one derivation", 1, 1);
  return build(top[0], {});
}

std::string print_proof(const Derivation& d) {
  std::string out;
  print(d, 0, out);
  return out + "\n";
}

}  // namespace sepgame
