#include "sepgame/proof.hpp"

#include <algorithm>
#include <utility>

#include "json.hpp"
#include "sepgame/logic.hpp"

namespace sepgame {

namespace {

using Scope = std::vector<std::pair<std::string, std::string>>;

std::string expr_key(const ExprPtr& e, const Scope& scope) {
  ExprPtr x = e;
  for (auto it = scope.rbegin(); it != scope.rend(); ++it) x = rename_var(x, it->first, it->second);
  return to_string(*x);
}

void flatten(const Formula& f, Formula::Kind k, std::vector<const Formula*>& out) {
  if (f.kind == k) {
    flatten(*f.lhs, k, out);
    flatten(*f.rhs, k, out);
  } else {
    out.push_back(&f);
  }
}

std::string key(const Formula& f, Scope& scope) {
  switch (f.kind) {
    case Formula::Kind::Emp:
      return "emp";
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::False:
      return "false";
    case Formula::Kind::Star:
    case Formula::Kind::And: {
      std::vector<const Formula*> parts;
      flatten(f, f.kind, parts);
      std::vector<std::string> keys;
      for (const Formula* p : parts) keys.push_back(key(*p, scope));
      std::sort(keys.begin(), keys.end());
      std::string out = f.kind == Formula::Kind::Star ? "(*" : "(&";
      for (const auto& k : keys) out += " " + k;
      return out + ")";
    }
    case Formula::Kind::Or:
      return "(| " + key(*f.lhs, scope) + " " + key(*f.rhs, scope) + ")";
    case Formula::Kind::Implies:
      return "(=> " + key(*f.lhs, scope) + " " + key(*f.rhs, scope) + ")";
    case Formula::Kind::Not:
      return "(~ " + key(*f.lhs, scope) + ")";
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      const std::string bound = "#" + std::to_string(scope.size());
      scope.emplace_back(f.name, bound);
      std::string body = key(*f.lhs, scope);
      scope.pop_back();
      return std::string(f.kind == Formula::Kind::Forall ? "(A " : "(E ") + bound + " " + body + ")";
    }
    case Formula::Kind::Own:
      return "own_" + f.perm.str() + "(" + f.name + ")";
    case Formula::Kind::OwnAny:
      return "own_*(" + f.name + ")";
    case Formula::Kind::PointsTo:
      return "(|-> " + expr_key(f.e1, scope) + " " + f.perm.str() + " " + expr_key(f.e2, scope) + ")";
    case Formula::Kind::Eq:
      return "(= " + expr_key(f.e1, scope) + " " + expr_key(f.e2, scope) + ")";
  }
  return "?";
}

void formula_vars(const Formula& f, std::set<std::string>& out) {
  switch (f.kind) {
    case Formula::Kind::Own:
    case Formula::Kind::OwnAny:
      out.insert(f.name);
      return;
    case Formula::Kind::PointsTo:
    case Formula::Kind::Eq:
      collect_program_vars(*f.e1, out);
      collect_program_vars(*f.e2, out);
      return;
    default:
      if (f.lhs) formula_vars(*f.lhs, out);
      if (f.rhs) formula_vars(*f.rhs, out);
  }
}

void assigned(const Command& c, std::set<std::string>& out) {
  switch (c.kind) {
    case Command::Kind::Assign:
    case Command::Kind::Load:
    case Command::Kind::Alloc:
      out.insert(c.name);
      break;
    default:
      break;
  }
  if (c.c1) assigned(*c.c1, out);
  if (c.c2) assigned(*c.c2, out);
}

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a)
    if (b.count(x)) return false;
  return true;
}

std::string join(const std::set<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ",") + x;
  return out;
}

// A bound name for `E |-> -` that does not capture anything in E.
std::string fresh_logical(const Expr& e) {
  std::set<std::string> used;
  collect_logical_vars(e, used);
  std::string v = "V";
  while (used.count(v)) v += "'";
  return v;
}

FormulaPtr points_to_any(const ExprPtr& loc) {
  const std::string v = fresh_logical(*loc);
  return Formula::exists(v, Formula::points_to(loc, Perm::full(), Expr::var(v)));
}

class Checker {
 public:
  Checker(const Universe& u, const ProofOptions& o, ProofReport& r) : u_(u), opts_(o), report_(r) {}

  void node(const Derivation& d, const std::string& path) {
    path_ = path;
    rule_ = d.rule;
    if (is_extension(d.rule)) {
      report_.extensions_used.insert(to_string(d.rule));
      if (!opts_.allow_extensions) fail("extension rule used without allowing extensions");
    }
    rule(d);
    for (std::size_t i = 0; i < d.kids.size(); ++i)
      node(*d.kids[i], path == "/" ? "/" + std::to_string(i) : path + "/" + std::to_string(i));
  }

 private:
  void fail(std::string why) { report_.violations.push_back({path_, rule_, std::move(why)}); }

  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }

  void match(const FormulaPtr& got, const FormulaPtr& want, const std::string& what) {
    if (!same_formula(*got, *want)) fail(what + " is " + to_string(*got) + ", expected " + to_string(*want));
  }

  bool kind(const Derivation& d, Command::Kind k, const char* what) {
    if (d.concl.cmd->kind == k) return true;
    fail(std::string("command is not ") + what + ": " + to_string(*d.concl.cmd));
    return false;
  }

  void same_ctx(const Context& got, const Context& want, const std::string& who) {
    bool ok = got.size() == want.size();
    for (auto it = got.begin(); ok && it != got.end(); ++it) {
      auto w = want.find(it->first);
      ok = w != want.end() && same_formula(*it->second, *w->second);
    }
    expect(ok, who + " has a different context");
  }

  void premise_cmd(const Derivation& kid, const CommandPtr& want, const std::string& who) {
    if (want && !(*kid.concl.cmd == *want))
      fail(who + " proves " + to_string(*kid.concl.cmd) + " instead of " + to_string(*want));
  }

  bool value_param(const Derivation& d) {
    if (!d.val) {
      fail("missing :val for the schema's logical variable");
      return false;
    }
    std::set<std::string> pv;
    collect_program_vars(*d.val, pv);
    if (!pv.empty()) {
      fail(":val mentions program variables " + join(pv));
      return false;
    }
    return true;
  }

  void defined_guard(const Derivation& d) {
    expect(entails(*d.concl.pre, *def_formula(*d.concl.cmd->cond), u_),
           "precondition does not entail def(" + to_string(*d.concl.cmd->cond) + ")");
  }

  void rule(const Derivation& d) {
    const auto& s = d.concl;
    const Command& c = *s.cmd;
    const auto& k = d.kids;
    switch (d.rule) {
      case Rule::Aff: {
        if (!kind(d, Command::Kind::Assign, "an assignment") || !value_param(d)) return;
        auto own = Formula::own(Perm::full(), c.name);
        match(s.pre, Formula::star(own, Formula::eq(d.val, c.e1)), "precondition");
        match(s.post, Formula::star(own, Formula::eq(Expr::var(c.name), d.val)), "postcondition");
        return;
      }
      case Rule::Store: {
        if (!kind(d, Command::Kind::Store, "a store")) return;
        match(s.pre, points_to_any(c.e1), "precondition");
        match(s.post, Formula::points_to(c.e1, Perm::full(), c.e2), "postcondition");
        std::set<std::string> stored, at;
        collect_program_vars(*c.e2, stored);
        collect_program_vars(*c.e1, at);
        expect(std::includes(at.begin(), at.end(), stored.begin(), stored.end()),
               "stored value reads variables the location does not: " + join(stored));
        return;
      }
      case Rule::Load: {
        if (!kind(d, Command::Kind::Load, "a load") || !value_param(d)) return;
        std::set<std::string> fv;
        collect_program_vars(*c.e1, fv);
        expect(!fv.count(c.name), c.name + " occurs in the address " + to_string(*c.e1));
        auto cell = Formula::star(Formula::points_to(c.e1, d.perm, d.val), Formula::own(Perm::full(), c.name));
        match(s.pre, cell, "precondition");
        match(s.post, Formula::star(cell, Formula::eq(Expr::var(c.name), d.val)), "postcondition");
        return;
      }
      case Rule::Seq:
        if (!kind(d, Command::Kind::Seq, "a sequence")) return;
        premise_cmd(*k[0], c.c1, "first premise");
        premise_cmd(*k[1], c.c2, "second premise");
        same_ctx(k[0]->concl.ctx, s.ctx, "first premise");
        same_ctx(k[1]->concl.ctx, s.ctx, "second premise");
        match(k[0]->concl.pre, s.pre, "first premise precondition");
        match(k[1]->concl.pre, k[0]->concl.post, "second premise precondition");
        match(k[1]->concl.post, s.post, "second premise postcondition");
        return;
      case Rule::If: {
        if (!kind(d, Command::Kind::If, "a conditional")) return;
        defined_guard(d);
        premise_cmd(*k[0], c.c1, "then premise");
        premise_cmd(*k[1], c.c2, "else premise");
        same_ctx(k[0]->concl.ctx, s.ctx, "then premise");
        same_ctx(k[1]->concl.ctx, s.ctx, "else premise");
        auto b = bexpr_formula(*c.cond);
        match(k[0]->concl.pre, Formula::conj(s.pre, b), "then precondition");
        match(k[1]->concl.pre, Formula::conj(s.pre, Formula::negate(b)), "else precondition");
        match(k[0]->concl.post, s.post, "then postcondition");
        match(k[1]->concl.post, s.post, "else postcondition");
        return;
      }
      case Rule::Conj:
        for (const auto& [r, j] : s.ctx) expect(is_precise(*j, u_), "context is not precise: " + r + ":" + to_string(*j));
        premise_cmd(*k[0], s.cmd, "first premise");
        premise_cmd(*k[1], s.cmd, "second premise");
        same_ctx(k[0]->concl.ctx, s.ctx, "first premise");
        same_ctx(k[1]->concl.ctx, s.ctx, "second premise");
        match(s.pre, Formula::conj(k[0]->concl.pre, k[1]->concl.pre), "precondition");
        match(s.post, Formula::conj(k[0]->concl.post, k[1]->concl.post), "postcondition");
        return;
      case Rule::Res: {
        if (!kind(d, Command::Kind::Resource, "a resource block")) return;
        if (!d.invariant) {
          fail("missing :J for resource " + c.name);
          return;
        }
        expect(!s.ctx.count(c.name), "resource " + c.name + " is already in the context");
        premise_cmd(*k[0], c.c1, "premise");
        auto inner = s.ctx;
        inner[c.name] = d.invariant;
        same_ctx(k[0]->concl.ctx, inner, "premise");
        match(s.pre, Formula::star(k[0]->concl.pre, d.invariant), "precondition");
        match(s.post, Formula::star(k[0]->concl.post, d.invariant), "postcondition");
        return;
      }
      case Rule::With: {
        if (!kind(d, Command::Kind::With, "a with block")) return;
        auto it = s.ctx.find(c.name);
        if (it == s.ctx.end()) {
          fail("resource " + c.name + " is not in the context");
          return;
        }
        const auto& j = it->second;
        defined_guard(d);
        premise_cmd(*k[0], c.c1, "premise");
        auto inner = s.ctx;
        inner.erase(c.name);
        same_ctx(k[0]->concl.ctx, inner, "premise");
        match(k[0]->concl.pre, Formula::conj(Formula::star(s.pre, j), bexpr_formula(*c.cond)), "premise precondition");
        match(k[0]->concl.post, Formula::star(s.post, j), "premise postcondition");
        return;
      }
      case Rule::Par: {
        if (!kind(d, Command::Kind::Par, "a parallel composition")) return;
        premise_cmd(*k[0], c.c1, "left premise");
        premise_cmd(*k[1], c.c2, "right premise");
        same_ctx(k[0]->concl.ctx, s.ctx, "left premise");
        same_ctx(k[1]->concl.ctx, s.ctx, "right premise");
        match(s.pre, Formula::star(k[0]->concl.pre, k[1]->concl.pre), "precondition");
        match(s.post, Formula::star(k[0]->concl.post, k[1]->concl.post), "postcondition");
        for (int i = 0; i < 2; ++i) {
          auto mod = modified_vars(*k[i]->concl.cmd);
          auto fv = program_vars(*k[1 - i]->concl.pre);
          auto fq = program_vars(*k[1 - i]->concl.post);
          fv.insert(fq.begin(), fq.end());
          expect(disjoint(mod, fv), std::string(i == 0 ? "left" : "right") +
                                        " thread assigns variables the other thread's assertions mention");
        }
        return;
      }
      case Rule::Frame: {
        if (!d.frame) {
          fail("missing :R");
          return;
        }
        premise_cmd(*k[0], s.cmd, "premise");
        same_ctx(k[0]->concl.ctx, s.ctx, "premise");
        match(s.pre, Formula::star(k[0]->concl.pre, d.frame), "precondition");
        match(s.post, Formula::star(k[0]->concl.post, d.frame), "postcondition");
        expect(disjoint(modified_vars(c), program_vars(*d.frame)), "command assigns variables the frame mentions");
        return;
      }
      case Rule::ExtSkip:
        if (!kind(d, Command::Kind::Skip, "skip")) return;
        match(s.post, s.pre, "postcondition");
        return;
      case Rule::ExtWhile: {
        if (!kind(d, Command::Kind::While, "a loop")) return;
        if (!d.invariant) {
          fail("missing :inv");
          return;
        }
        const auto& inv = d.invariant;
        expect(entails(*inv, *def_formula(*c.cond), u_),
               "invariant does not entail def(" + to_string(*c.cond) + ")");
        premise_cmd(*k[0], c.c1, "premise");
        same_ctx(k[0]->concl.ctx, s.ctx, "premise");
        auto b = bexpr_formula(*c.cond);
        match(s.pre, inv, "precondition");
        match(s.post, Formula::conj(inv, Formula::negate(b)), "postcondition");
        match(k[0]->concl.pre, Formula::conj(inv, b), "premise precondition");
        match(k[0]->concl.post, inv, "premise postcondition");
        return;
      }
      case Rule::ExtConseq:
        premise_cmd(*k[0], s.cmd, "premise");
        same_ctx(k[0]->concl.ctx, s.ctx, "premise");
        expect(entails(*s.pre, *k[0]->concl.pre, u_), "precondition does not entail the premise's");
        expect(entails(*k[0]->concl.post, *s.post, u_), "premise postcondition does not entail the conclusion's");
        return;
      case Rule::ExtAlloc: {
        if (!kind(d, Command::Kind::Alloc, "an allocation") || !value_param(d)) return;
        auto own = Formula::own(Perm::full(), c.name);
        match(s.pre, Formula::star(own, Formula::eq(d.val, c.e1)), "precondition");
        match(s.post, Formula::star(own, Formula::points_to(Expr::var(c.name), Perm::full(), d.val)),
              "postcondition");
        return;
      }
      case Rule::ExtDispose:
        if (!kind(d, Command::Kind::Dispose, "a dispose")) return;
        match(s.pre, points_to_any(c.e1), "precondition");
        match(s.post, Formula::emp(), "postcondition");
        return;
    }
  }

  const Universe& u_;
  const ProofOptions& opts_;
  ProofReport& report_;
  std::string path_;
  Rule rule_ = Rule::Aff;
};

}  // namespace

std::string normal_form(const Formula& f) {
  Scope scope;
  return key(f, scope);
}

bool same_formula(const Formula& a, const Formula& b) { return normal_form(a) == normal_form(b); }

std::set<std::string> program_vars(const Formula& f) {
  std::set<std::string> out;
  formula_vars(f, out);
  return out;
}

std::set<std::string> modified_vars(const Command& c) {
  std::set<std::string> out;
  assigned(c, out);
  return out;
}

ProofReport check_proof(const Derivation& d, const Universe& u, const ProofOptions& opts) {
  ProofReport report;
  report.conclusion = d.concl;
  Checker(u, opts, report).node(d, "/");
  return report;
}

std::string violations_json(const ProofReport& r, const Universe& u) {
  auto out = nlohmann::json::array();
  for (const auto& v : r.violations)
    out.push_back({{"node-path", v.path}, {"rule", to_string(v.rule)}, {"reason", v.reason}, {"universe", u.describe()}});
  return out.dump(2);
}

}  // namespace sepgame
