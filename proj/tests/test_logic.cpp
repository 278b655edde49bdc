#include "doctest.h"
#include "gen.hpp"
#include "sepgame/logic.hpp"
#include "sepgame/parser.hpp"

using namespace sepgame;

namespace {

Universe small() { return parse_universe("vars=x,y\nvals=0..1\nperms=1/2,1\n"); }

LogicalState ls(const std::string& text) { return parse_logical_state(text); }

bool sat(const std::string& state, const std::string& f, const Universe& u, const Valuation& rho = {}) {
  return satisfies(ls(state), *parse_formula(f), rho, u);
}

// Brute force: every pair over the keys of σ whose tensor is σ.
std::set<std::pair<LogicalState, LogicalState>> split_oracle(const LogicalState& s, const std::vector<Perm>& perms) {
  std::vector<LogicalState> parts{LogicalState{}};
  for (const auto& [k, c] : s.stack) {
    std::vector<LogicalState> next;
    for (const auto& p : parts) {
      next.push_back(p);
      for (Perm q : perms) {
        auto x = p;
        x.stack[k] = Cell{c.value, q};
        next.push_back(x);
      }
    }
    parts = next;
  }
  for (const auto& [k, c] : s.heap) {
    std::vector<LogicalState> next;
    for (const auto& p : parts) {
      next.push_back(p);
      for (Perm q : perms) {
        auto x = p;
        x.heap[k] = Cell{c.value, q};
        next.push_back(x);
      }
    }
    parts = next;
  }
  std::set<std::pair<LogicalState, LogicalState>> out;
  for (const auto& a : parts)
    for (const auto& b : parts) {
      auto t = tensor(a, b);
      if (t && *t == s) out.emplace(a, b);
    }
  return out;
}

LogicalState random_state(gen::Rng& rng, const std::vector<Perm>& perms) {
  LogicalState s;
  for (const char* x : {"x", "y", "z"})
    if (rng.coin()) s.stack[x] = Cell{rng.below(3), perms[static_cast<std::size_t>(rng.below(static_cast<int>(perms.size())))]};
  for (Value l : {100, 101})
    if (rng.coin()) s.heap[l] = Cell{rng.below(3), perms[static_cast<std::size_t>(rng.below(static_cast<int>(perms.size())))]};
  return s;
}

}  // namespace

TEST_CASE("substate counts") {
  const std::vector<Perm> half_one{*Perm::make(1, 2), *Perm::make(1, 1)};
  CHECK(substates(LogicalState{}, half_one).size() == 1);
  // whole left, whole right, or half each
  CHECK(substates(ls("s{x=3@1} h{}"), half_one).size() == 3);
  CHECK(substates(ls("s{x=3@1,y=0@1} h{}"), half_one).size() == 9);
  CHECK(substates(ls("s{x=3@1/2} h{}"), half_one).size() == 2);
}

TEST_CASE("substates agree with the brute-force split") {
  gen::Rng rng(11);
  for (const auto& perms : {std::vector<Perm>{*Perm::make(1, 2), *Perm::make(1, 1)},
                            std::vector<Perm>{*Perm::make(1, 4), *Perm::make(1, 2), *Perm::make(3, 4), *Perm::make(1, 1)}}) {
    const int rounds = perms.size() > 2 ? 30 : 300;
    for (int i = 0; i < rounds; ++i) {
      auto s = random_state(rng, perms);
      auto got = substates(s, perms);
      std::set<std::pair<LogicalState, LogicalState>> got_set(got.begin(), got.end());
      CHECK(got_set.size() == got.size());
      CHECK(got_set == split_oracle(s, perms));
    }
  }
}

TEST_CASE("tensor laws") {
  gen::Rng rng(5);
  const std::vector<Perm> perms{*Perm::make(1, 2), *Perm::make(1, 1)};
  for (int i = 0; i < 2000; ++i) {
    auto a = random_state(rng, perms);
    auto b = random_state(rng, perms);
    auto c = random_state(rng, perms);
    CHECK(tensor(a, b) == tensor(b, a));
    auto ab = tensor(a, b);
    auto bc = tensor(b, c);
    std::optional<LogicalState> left = ab ? tensor(*ab, c) : std::nullopt;
    std::optional<LogicalState> right = bc ? tensor(a, *bc) : std::nullopt;
    CHECK(left == right);
    CHECK(tensor(a, LogicalState{}) == a);
    // cancellative
    auto ac = tensor(a, c);
    if (ab && ac && *ab == *ac) CHECK(b == c);
    if (ab) {
      auto e = erase(*ab);
      for (const auto& [k, v] : erase(a).stack) CHECK(e.stack.at(k) == v);
      for (const auto& [k, v] : erase(b).heap) CHECK(e.heap.at(k) == v);
    }
  }
}

TEST_CASE("satisfaction clauses") {
  auto u = parse_universe("vars=x,y\nlocs=100\nvals=0..3\nperms=1/2,1\n");
  CHECK(sat("s{} h{}", "emp", u));
  CHECK_FALSE(sat("s{x=1@1} h{}", "emp", u));
  CHECK(sat("s{x=1@1} h{}", "own_1(x)", u));
  CHECK_FALSE(sat("s{x=1@1/2} h{}", "own_1(x)", u));
  CHECK(sat("s{x=1@1/2} h{}", "own_*(x)", u));
  // own does not demand that nothing else is owned
  CHECK(sat("s{x=1@1,y=2@1} h{}", "own_1(x)", u));
  CHECK(sat("s{x=1@1,y=2@1} h{}", "own_1(x) * own_1(y)", u));
  CHECK(sat("s{x=1@1} h{}", "own_1/2(x) * own_1/2(x)", u));
  CHECK_FALSE(sat("s{x=1@1} h{}", "own_1(x) * own_1(x)", u));
  CHECK(sat("s{x=1@1} h{}", "own_1(x) * x = 1", u));
  CHECK_FALSE(sat("s{} h{}", "x = 1", u));
  CHECK(sat("s{x=100@1} h{100=3@1}", "own_1(x) * x |-> 3", u));
  CHECK_FALSE(sat("s{x=100@1} h{100=3@1/2}", "own_1(x) * x |-> 3", u));
  CHECK(sat("s{x=100@1} h{100=3@1/2}", "own_1(x) * x |->_1/2 3", u));
  CHECK(sat("s{} h{100=2@1}", "exists V. 100 |-> V", u));
  CHECK(sat("s{} h{100=2@1}", "100 |-> -", u));
  CHECK_FALSE(sat("s{} h{100=2@1}", "forall V. 100 |-> V", u));
  CHECK(sat("s{x=1@1} h{}", "own_1(x) /\\ x = X", u, {{"X", 1}}));
  CHECK_THROWS_AS(sat("s{x=1@1} h{}", "x = X", u), LogicError);
  CHECK(sat("s{x=1@1} h{}", "x = 2 => false", u));
  CHECK(sat("s{x=1@1} h{}", "~(x = 2)", u));
}

TEST_CASE("precision") {
  auto u = small();
  CHECK(is_precise(*parse_formula("emp"), u));
  CHECK_FALSE(is_precise(*parse_formula("true"), u));
  CHECK(is_precise(*parse_formula("false"), u));
  // non-exact own: the state may carry more than x
  CHECK_FALSE(is_precise(*parse_formula("own_1(x)"), u));
  CHECK(is_precise(*parse_formula("own_1(x) /\\ ~(own_1(x) * ~emp)"), u));
  CHECK_FALSE(is_precise(*parse_formula("emp \\/ own_1(x)"), u));
}

TEST_CASE("entailment") {
  auto u = parse_universe("vars=x\nvals=0..2\nperms=1/2,1\n");
  CHECK(entails(*parse_formula("own_1(x) /\\ x = 1"), *def_formula(*parse_bexpr("x = 2")), u));
  CHECK_FALSE(entails(*parse_formula("emp"), *def_formula(*parse_bexpr("x = 0")), u));
  for (const char* f : {"emp", "own_1(x)", "own_1/2(x) * x = 1", "exists X. own_1(x) /\\ x = X"})
    CHECK(entails(*parse_formula(f), *parse_formula(f), u));
  CHECK(entails(*parse_formula("own_1(x) * x = 1"), *parse_formula("own_1(x) * true"), u));
  CHECK_FALSE(entails(*parse_formula("true"), *parse_formula("own_1(x)"), u));
  CHECK(to_string(*def_formula(*parse_bexpr("true"))) == "true");
}

TEST_CASE("emp is a unit for separation") {
  auto u = parse_universe("vars=x,y\nlocs=100\nvals=0..1\nperms=1/2,1\n");
  gen::Rng rng(3);
  for (int i = 0; i < 60; ++i) {
    auto p = gen::formula(rng, 2);
    auto pe = Formula::star(p, Formula::emp());
    std::set<std::string> free;
    collect_free_logical_vars(*p, free);
    for (const auto& rho : valuations(free, u)) {
      for (int j = 0; j < 5; ++j) {
        LogicalState s;
        if (rng.coin()) s.stack["x"] = Cell{rng.below(2), rng.coin() ? *Perm::make(1, 2) : *Perm::make(1, 1)};
        if (rng.coin()) s.heap[100] = Cell{rng.below(2), *Perm::make(1, 1)};
        INFO(to_string(*p) << " at " << to_string(s));
        CHECK(satisfies(s, *p, rho, u) == satisfies(s, *pe, rho, u));
      }
    }
  }
}
