#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "sepgame/logic.hpp"
#include "sepgame/parser.hpp"
#include "sepgame/proof.hpp"

using namespace sepgame;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in, "cannot open " << p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Universe& small() {
  static const Universe u = parse_universe("vars=x,y,z\nlocs=100\nvals=0..3\nperms=1/2,1\nlocks=r\n");
  return u;
}

ProofReport check(const std::string& text, bool ext = false) {
  return check_proof(*parse_proof(text), small(), ProofOptions{ext});
}

bool names(const ProofReport& r, const std::string& path, Rule rule) {
  for (const auto& v : r.violations)
    if (v.path == path && v.rule == rule) return true;
  return false;
}

std::vector<fs::path> files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Renames a free logical variable, leaving shadowed occurrences alone.
FormulaPtr rename(const FormulaPtr& f, const std::string& from, const std::string& to) {
  auto re = [&](const FormulaPtr& g) { return g ? rename(g, from, to) : g; };
  auto ex = [&](const ExprPtr& e) { return e ? rename_var(e, from, to) : e; };
  switch (f->kind) {
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      if (f->name == from) return f;
      return f->kind == Formula::Kind::Forall ? Formula::forall(f->name, re(f->lhs))
                                              : Formula::exists(f->name, re(f->lhs));
    case Formula::Kind::PointsTo:
      return Formula::points_to(ex(f->e1), f->perm, ex(f->e2));
    case Formula::Kind::Eq:
      return Formula::eq(ex(f->e1), ex(f->e2));
    case Formula::Kind::Or:
      return Formula::disj(re(f->lhs), re(f->rhs));
    case Formula::Kind::And:
      return Formula::conj(re(f->lhs), re(f->rhs));
    case Formula::Kind::Star:
      return Formula::star(re(f->lhs), re(f->rhs));
    case Formula::Kind::Implies:
      return Formula::implies(re(f->lhs), re(f->rhs));
    case Formula::Kind::Not:
      return Formula::negate(re(f->lhs));
    default:
      return f;
  }
}

// Random AC rearrangement plus renaming of bound variables.
FormulaPtr shake(const FormulaPtr& f, gen::Rng& rng, int& fresh) {
  switch (f->kind) {
    case Formula::Kind::Star:
    case Formula::Kind::And: {
      auto mk = f->kind == Formula::Kind::Star ? Formula::star : Formula::conj;
      auto a = shake(f->lhs, rng, fresh);
      auto b = shake(f->rhs, rng, fresh);
      if (rng.coin()) std::swap(a, b);
      // (a ⊙ (b1 ⊙ b2)) -> ((a ⊙ b1) ⊙ b2)
      if (b->kind == f->kind && rng.coin()) return mk(mk(a, b->lhs), b->rhs);
      return mk(a, b);
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      const std::string w = "W" + std::to_string(fresh++);
      auto body = shake(rename(f->lhs, f->name, w), rng, fresh);
      return f->kind == Formula::Kind::Forall ? Formula::forall(w, body) : Formula::exists(w, body);
    }
    case Formula::Kind::Or:
      return Formula::disj(shake(f->lhs, rng, fresh), shake(f->rhs, rng, fresh));
    case Formula::Kind::Implies:
      return Formula::implies(shake(f->lhs, rng, fresh), shake(f->rhs, rng, fresh));
    case Formula::Kind::Not:
      return Formula::negate(shake(f->lhs, rng, fresh));
    default:
      return f;
  }
}

}  // namespace

TEST_CASE("proof scripts parse with inherited commands and contexts") {
  auto d = parse_proof(R"P((par :ctx ((r "emp")) :pre "own_1(x) * own_1(y)" :cmd "x := 1 || y := 2" :post "true"
      (aff :pre "own_1(x)" :post "true" :val "1")
      (aff :pre "own_1(y)" :post "true" :val "2")))P");
  CHECK(d->rule == Rule::Par);
  REQUIRE(d->kids.size() == 2);
  CHECK(to_string(*d->kids[1]->concl.cmd) == "y := 2");
  CHECK(d->kids[0]->concl.ctx.count("r") == 1);

  auto res = parse_proof(R"P((res :pre "emp" :cmd "resource q do with q when true do skip" :post "emp" :J "own_1(x)"
      (with :pre "emp" :post "emp" (ext-skip :pre "emp" :post "emp"))))P");
  CHECK(res->kids[0]->concl.ctx.count("q") == 1);
  CHECK(res->kids[0]->kids[0]->concl.ctx.empty());
  CHECK(res->kids[0]->kids[0]->concl.cmd->kind == Command::Kind::Skip);

  CHECK_THROWS_AS(parse_proof(R"P((conj :pre "emp" :cmd "skip" :post "emp" (ext-skip :pre "emp" :post "emp")))P"),
                  ParseError);
  CHECK_THROWS_AS(parse_proof(R"P((cut :pre "emp" :cmd "skip" :post "emp"))P"), ParseError);
  CHECK_THROWS_AS(parse_proof(R"P((aff :cmd "x := 1" :post "emp"))P"), ParseError);
  CHECK_THROWS_AS(parse_proof(R"P((aff :pre "emp" :post "emp" :val "1"))P"), ParseError);
  CHECK_THROWS_AS(parse_proof(R"P((aff :pre "emp" :cmd "x := 1" :post "emp" :bogus "1"))P"), ParseError);
  try {
    parse_proof("(aff :pre \"emp\"\n  :cmd \"x := \" :post \"emp\")");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("Aff instance with X = 3 and E = x + 1") {
  auto r = check(R"P((aff :pre "own_1(x) * 3 = x + 1" :cmd "x := x + 1" :post "own_1(x) * x = 3" :val "3"))P");
  CHECK(r.accepted());
  // operands of * commute
  CHECK(check(R"P((aff :pre "3 = x + 1 * own_1(x)" :cmd "x := x + 1" :post "own_1(x) * x = 3" :val "3"))P")
            .accepted());
  auto wrong = check(R"P((aff :pre "own_1(x) * 3 = x + 1" :cmd "x := x + 1" :post "own_1(x) * x = 4" :val "3"))P");
  CHECK(names(wrong, "/", Rule::Aff));
  CHECK(names(check(R"P((aff :pre "own_1(x) * y = x" :cmd "x := x" :post "own_1(x) * x = y" :val "y"))P"), "/",
              Rule::Aff));
}

TEST_CASE("Conj needs a precise context") {
  const std::string body = R"P(
      :pre "(own_1(x) * 1 = 1) /\ (own_1(x) * 1 = 1)" :cmd "x := 1"
      :post "(own_1(x) * x = 1) /\ (own_1(x) * x = 1)"
    (aff :pre "own_1(x) * 1 = 1" :post "own_1(x) * x = 1" :val "1")
    (aff :pre "own_1(x) * 1 = 1" :post "own_1(x) * x = 1" :val "1")))P";
  CHECK(check("(conj :ctx ((r \"emp\"))" + body).accepted());
  auto r = check("(conj :ctx ((r \"true\"))" + body);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].path == "/");
  CHECK(r.violations[0].rule == Rule::Conj);
  CHECK(r.violations[0].reason.find("precise") != std::string::npos);
  auto json = violations_json(r, small());
  CHECK(json.find("\"node-path\": \"/\"") != std::string::npos);
  CHECK(json.find("\"rule\": \"conj\"") != std::string::npos);
}

TEST_CASE("extension rules are gated and reported") {
  const std::string skip = R"P((ext-skip :pre "own_1(x)" :cmd "skip" :post "own_1(x)"))P";
  auto off = check(skip);
  CHECK_FALSE(off.accepted());
  CHECK(off.violations[0].reason.find("extension") != std::string::npos);
  auto on = check(skip, true);
  CHECK(on.accepted());
  CHECK(on.extensions_used == std::set<std::string>{"ext-skip"});

  auto loop = R"P((ext-while :pre "own_1(x)" :cmd "while x = 0 do x := 1" :post "own_1(x) /\ ~(x = 0)" :inv "own_1(x)"
      (ext-conseq :pre "own_1(x) /\ x = 0" :post "own_1(x)"
        (aff :pre "own_1(x) * 1 = 1" :post "own_1(x) * x = 1" :val "1"))))P";
  auto w = check(loop, true);
  CHECK(w.accepted());
  CHECK(w.extensions_used == std::set<std::string>{"ext-conseq", "ext-while"});
  auto bad = check(R"P((ext-conseq :pre "emp" :cmd "x := 1" :post "own_1(x) * x = 1"
      (aff :pre "own_1(x) * 1 = 1" :post "own_1(x) * x = 1" :val "1")))P",
                   true);
  CHECK(names(bad, "/", Rule::ExtConseq));
  CHECK(check(R"P((ext-alloc :pre "own_1(x) * 2 = 2" :cmd "x := alloc(2)" :post "own_1(x) * x |-> 2" :val "2"))P", true)
            .accepted());
  CHECK(check(R"P((ext-dispose :pre "100 |-> -" :cmd "dispose(100)" :post "emp"))P", true).accepted());
}

// One accepted instance per rule and a near miss that only breaks the side
// condition or the shape.
TEST_CASE("rule coverage: accepted instances and near misses") {
  struct Pair {
    Rule rule;
    std::string good;
    std::string bad;
  };
  const std::string aff_x = R"P((aff :pre "own_1(x) * 1 = 1" :post "own_1(x) * x = 1" :val "1"))P";
  const std::string aff_y = R"P((aff :pre "own_1(y) * 1 = 1" :post "own_1(y) * y = 1" :val "1"))P";
  std::vector<Pair> pairs = {
      {Rule::Aff, R"P((aff :pre "own_1(x) * 2 = 2" :cmd "x := 2" :post "own_1(x) * x = 2" :val "2"))P",
       R"P((aff :pre "own_1(x) * 2 = 2" :cmd "x := 2" :post "own_1/2(x) * x = 2" :val "2"))P"},
      {Rule::Store, R"P((store :pre "100 |-> -" :cmd "[100] := 3" :post "100 |-> 3"))P",
       R"P((store :pre "100 |->_1/2 -" :cmd "[100] := 3" :post "100 |-> 3"))P"},
      {Rule::Load, R"P((load :pre "100 |->_1/2 1 * own_1(x)" :cmd "x := [100]" :post "(100 |->_1/2 1 * own_1(x)) * x = 1" :val "1" :perm 1/2))P",
       R"P((load :pre "x |->_1/2 1 * own_1(x)" :cmd "x := [x]" :post "(x |->_1/2 1 * own_1(x)) * x = 1" :val "1" :perm 1/2))P"},
      {Rule::Seq,
       R"P((seq :pre "(own_1(x) * 1 = 1) * (own_1(y) * 1 = 1)" :cmd "x := 1; y := 1" :post "(own_1(x) * x = 1) * (own_1(y) * y = 1)"
           (frame :pre "(own_1(x) * 1 = 1) * (own_1(y) * 1 = 1)" :post "(own_1(x) * x = 1) * (own_1(y) * 1 = 1)" :R "own_1(y) * 1 = 1" )P" +
           aff_x + R"P()
           (frame :pre "(own_1(y) * 1 = 1) * (own_1(x) * x = 1)" :post "(own_1(y) * y = 1) * (own_1(x) * x = 1)" :R "own_1(x) * x = 1" )P" +
           aff_y + "))",
       R"P((seq :pre "(own_1(x) * 1 = 1) * (own_1(y) * 1 = 1)" :cmd "x := 1; y := 1" :post "(own_1(x) * x = 1) * (own_1(y) * y = 1)"
           (frame :pre "(own_1(x) * 1 = 1) * (own_1(y) * 1 = 1)" :post "(own_1(x) * x = 1) * (own_1(y) * 1 = 1)" :R "own_1(y) * 1 = 1" )P" +
           aff_x + R"P()
           (frame :pre "(own_1(y) * 1 = 1) * (own_1(x) * x = 2)" :post "(own_1(y) * y = 1) * (own_1(x) * x = 2)" :R "own_1(x) * x = 2" )P" +
           aff_y + "))"},
      {Rule::If,
       R"P((if :pre "(own_1(x) * 1 = 1) * own_1/2(y)" :cmd "if y = 0 then x := 1 else x := 1" :post "own_1(x) * x = 1"
           (ext-conseq :pre "((own_1(x) * 1 = 1) * own_1/2(y)) /\ y = 0" :post "own_1(x) * x = 1" )P" + aff_x + R"P()
           (ext-conseq :pre "((own_1(x) * 1 = 1) * own_1/2(y)) /\ ~(y = 0)" :post "own_1(x) * x = 1" )P" + aff_x + "))",
       R"P((if :pre "(own_1(x) * 1 = 1)" :cmd "if y = 0 then x := 1 else x := 1" :post "own_1(x) * x = 1"
           (ext-conseq :pre "(own_1(x) * 1 = 1) /\ y = 0" :post "own_1(x) * x = 1" )P" + aff_x + R"P()
           (ext-conseq :pre "(own_1(x) * 1 = 1) /\ ~(y = 0)" :post "own_1(x) * x = 1" )P" + aff_x + "))"},
      {Rule::Conj,
       R"P((conj :ctx ((r "emp")) :pre "(own_1(x) * 1 = 1) /\ (own_1(x) * 1 = 1)" :cmd "x := 1" :post "(own_1(x) * x = 1) /\ (own_1(x) * x = 1)" )P" +
           aff_x + aff_x + ")",
       R"P((conj :ctx ((r "own_1(y)")) :pre "(own_1(x) * 1 = 1) /\ (own_1(x) * 1 = 1)" :cmd "x := 1" :post "(own_1(x) * x = 1) /\ (own_1(x) * x = 1)" )P" +
           aff_x + aff_x + ")"},
      {Rule::Res,
       R"P((res :pre "(own_1(x) * 1 = 1) * own_1(y)" :cmd "resource r do x := 1" :post "(own_1(x) * x = 1) * own_1(y)" :J "own_1(y)" )P" +
           aff_x + ")",
       R"P((res :ctx ((r "emp")) :pre "(own_1(x) * 1 = 1) * own_1(y)" :cmd "resource r do x := 1" :post "(own_1(x) * x = 1) * own_1(y)" :J "own_1(y)" )P" +
           aff_x + ")"},
      {Rule::With,
       R"P((with :ctx ((r "own_1(y)")) :pre "own_1/2(x)" :cmd "with r when x = 0 do y := 1" :post "own_1/2(x)"
           (ext-conseq :pre "(own_1/2(x) * own_1(y)) /\ x = 0" :post "own_1/2(x) * own_1(y)"
             (frame :pre "(own_1(y) * 1 = 1) * own_1/2(x)" :post "(own_1(y) * y = 1) * own_1/2(x)" :R "own_1/2(x)" )P" +
           aff_y + ")))",
       R"P((with :ctx ((r "own_1(y)")) :pre "emp" :cmd "with r when x = 0 do y := 1" :post "emp"
           (ext-conseq :pre "(emp * own_1(y)) /\ x = 0" :post "emp * own_1(y)" )P" +
           aff_y + "))"},
      {Rule::Par,
       R"P((par :pre "(own_1(x) * 1 = 1) * (own_1(y) * 1 = 1)" :cmd "x := 1 || y := 1" :post "(own_1(x) * x = 1) * (own_1(y) * y = 1)" )P" +
           aff_x + aff_y + ")",
       R"P((par :pre "(own_1(x) * 1 = 1) * (own_1(y) * 1 = 1)" :cmd "x := 1 || y := 1" :post "(own_1(x) * x = 1) * (own_1(y) * y = 1)" )P" +
           aff_x + R"P((aff :ctx ((r "emp")) :pre "own_1(y) * 1 = 1" :post "own_1(y) * y = 1" :val "1")))P"},
      {Rule::Frame,
       R"P((frame :pre "(own_1(x) * 1 = 1) * y = 2" :cmd "x := 1" :post "(own_1(x) * x = 1) * y = 2" :R "y = 2" )P" +
           aff_x + ")",
       R"P((frame :pre "(own_1(x) * 1 = 1) * x = 2" :cmd "x := 1" :post "(own_1(x) * x = 1) * x = 2" :R "x = 2" )P" +
           aff_x + ")"},
  };
  for (const auto& p : pairs) {
    INFO(to_string(p.rule));
    auto good = check(p.good, true);
    for (const auto& v : good.violations) INFO(v.path << " " << v.reason);
    CHECK(good.accepted());
    auto bad = check(p.bad, true);
    CHECK(names(bad, "/", p.rule));
  }
}

TEST_CASE("corpus proofs are accepted and prove their programs") {
  const fs::path dir = SEPGAME_CORPUS_DIR;
  auto proofs = files(dir, ".prf");
  CHECK(proofs.size() >= 6);
  for (const auto& p : proofs) {
    INFO(p.filename().string());
    auto u = parse_universe(slurp(fs::path(p).replace_extension(".uni")));
    auto d = parse_proof(slurp(p));
    auto r = check_proof(*d, u, {true});
    for (const auto& v : r.violations) INFO(v.path << " " << to_string(v.rule) << ": " << v.reason);
    CHECK(r.accepted());
    auto program = parse_program(slurp(fs::path(p).replace_extension(".csl")));
    CHECK(*program == *d->concl.cmd);

    // printing and re-reading gives the same tree and verdict
    auto printed = print_proof(*d);
    auto again = parse_proof(printed);
    CHECK(print_proof(*again) == printed);
    auto r2 = check_proof(*again, u, {true});
    CHECK(r2.accepted());
    CHECK(r2.extensions_used == r.extensions_used);
  }
}

TEST_CASE("negative suite: every proof is rejected at the named node") {
  const fs::path dir = fs::path(SEPGAME_CORPUS_DIR) / "reject";
  auto u = parse_universe(slurp(dir / "reject.uni"));
  auto proofs = files(dir, ".prf");
  CHECK(proofs.size() >= 8);
  for (const auto& p : proofs) {
    INFO(p.filename().string());
    const auto text = slurp(p);
    std::istringstream first(text);
    std::string hash, expect, path, tag;
    first >> hash >> expect >> path >> tag;
    REQUIRE(expect == "expect");
    auto rule = parse_rule(tag);
    REQUIRE(rule);
    auto r = check_proof(*parse_proof(text), u, {true});
    CHECK_FALSE(r.accepted());
    CHECK(names(r, path, *rule));
  }
}

TEST_CASE("checking is deterministic") {
  const fs::path dir = fs::path(SEPGAME_CORPUS_DIR) / "reject";
  auto u = parse_universe(slurp(dir / "reject.uni"));
  for (const auto& p : files(dir, ".prf")) {
    auto d = parse_proof(slurp(p));
    CHECK(violations_json(check_proof(*d, u, {true}), u) == violations_json(check_proof(*d, u, {true}), u));
  }
}

TEST_CASE("AC and alpha normal forms") {
  auto f = [](const std::string& s) { return parse_formula(s); };
  CHECK(same_formula(*f("own_1(x) * (own_1(y) * emp)"), *f("(emp * own_1(y)) * own_1(x)")));
  CHECK(same_formula(*f("x = 1 /\\ (y = 2 /\\ true)"), *f("(true /\\ x = 1) /\\ y = 2")));
  CHECK(same_formula(*f("exists X. 100 |-> X"), *f("exists Y. 100 |-> Y")));
  CHECK_FALSE(same_formula(*f("own_1(x)"), *f("own_1/2(x)")));
  CHECK_FALSE(same_formula(*f("own_1(x) * own_1(y)"), *f("own_1(x) /\\ own_1(y)")));
  CHECK_FALSE(same_formula(*f("exists X. X = Y"), *f("exists Y. Y = Y")));
  // ∨ is not normalized
  CHECK_FALSE(same_formula(*f("x = 1 \\/ y = 1"), *f("y = 1 \\/ x = 1")));
}

TEST_CASE("formulas equal up to normalization entail each other") {
  auto u = parse_universe("vars=x,y\nvals=0..1\nperms=1/2,1\n");
  gen::Rng rng(17);
  std::size_t changed = 0;
  for (int i = 0; i < 60; ++i) {
    auto p = gen::formula(rng, 3);
    int fresh = 0;
    auto q = shake(p, rng, fresh);
    INFO(to_string(*p) << "  vs  " << to_string(*q));
    REQUIRE(same_formula(*p, *q));
    changed += to_string(*p) != to_string(*q);
    CHECK(entails(*p, *q, u));
    CHECK(entails(*q, *p, u));
  }
  CHECK(changed > 10);
}
