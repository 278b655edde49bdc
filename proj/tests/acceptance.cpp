// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "sepgame/derivation.hpp"
#include "sepgame/parser.hpp"
#include "sepgame/proof.hpp"
#include "sepgame/soundness.hpp"
#include "trace_laws.hpp"

using namespace sepgame;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = SEPGAME_CORPUS_DIR;

// program name -> rules its proof has to exercise
const std::vector<std::pair<std::string, std::vector<Rule>>> kProven = {
    {"par_disjoint", {Rule::Par}},
    {"frame_assign", {Rule::Frame}},
    {"lock_transfer", {Rule::Res, Rule::With}},
    {"load_store", {Rule::Seq, Rule::Load, Rule::Store}},
    {"conj_precise", {Rule::Conj}},
    {"if_def", {Rule::If}},
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Loaded {
  std::string name;
  DerivationPtr d;
  Universe u;
};

Loaded load(const fs::path& prf) {
  auto uni = prf;
  uni.replace_extension(".uni");
  return {prf.stem().string(), parse_proof(slurp(prf)), parse_universe(slurp(uni))};
}

std::vector<fs::path> proofs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".prf") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void rules_of(const Derivation& d, std::set<Rule>& out) {
  out.insert(d.rule);
  for (const auto& k : d.kids) rules_of(*k, out);
}

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& id, const std::string& what, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    o.ok = false;
    o.detail += " [over the " + std::to_string(static_cast<int>(limit_s)) + " s limit]";
  }
  char time[32];
  std::snprintf(time, sizeof time, "%.2fs", secs);
  std::cout << (o.ok ? "PASS " : "FAIL ") << id << " " << what << ": " << o.detail << " (" << time << ")"
            << std::endl;
  failures += !o.ok;
}

Outcome trace_algebra() {
  if (auto e = laws::shuffle_counts(8); !e.empty()) return {false, e};
  constexpr std::size_t kSamples = 10000;
  gen::Rng rng(20240611);
  for (std::size_t i = 0; i < kSamples; ++i) {
    for (auto law : {laws::seq_associative, laws::restrict_functorial, laws::hide_laws}) {
      auto e = law(rng);
      if (!e.empty()) return {false, e + " at sample " + std::to_string(i)};
    }
  }
  return {true, "shuffle counts for p+q<=8; seq, restrict and hide laws on " + std::to_string(kSamples) +
                    " random samples each"};
}

Outcome proven_programs() {
  Outcome o;
  std::size_t games = 0;
  for (const auto& [name, rules] : kProven) {
    auto l = load(kCorpus / (name + ".prf"));
    std::string why;
    const auto& u = l.u;
    if (u.vars.size() > 3 || u.locs.size() > 2 || u.lo < 0 || u.hi > 3 || u.perms.size() > 2 || u.maxlen < 6)
      why = "universe out of range";
    std::set<Rule> used;
    rules_of(*l.d, used);
    for (auto r : rules)
      if (!used.count(r)) why = "proof does not use " + to_string(r);
    auto checked = check_proof(*l.d, u, {true});
    if (!checked.accepted()) why = "proof rejected at " + checked.violations.front().path;
    if (why.empty()) {
      VerifyOptions opts;
      opts.jobs = 4;
      opts.enumerate.max_length = 6;
      auto r = verify_proof(*l.d, u, opts);
      games += r.games;
      if (!r.ok())
        why = std::to_string(r.failures.size()) + " failing games" +
              (r.failures.empty() ? "" : ", first: " + r.failures.front().result.reason);
      else if (r.played == 0)
        why = "no game is played";
    }
    if (!why.empty()) {
      o.ok = false;
      o.detail += name + ": " + why + "; ";
    }
  }
  if (o.ok) o.detail = std::to_string(kProven.size()) + " proofs, " + std::to_string(games) + " games won at length <= 6";
  return o;
}

Outcome solver_agreement() {
  std::size_t games = 0, won = 0;
  for (const auto& p : proofs(kCorpus / "small")) {
    auto l = load(p);
    if (l.u.vars.size() > 2 || l.u.lo < 0 || l.u.hi > 1) return {false, l.name + ": universe out of range"};
    auto up = std::make_shared<const Universe>(l.u);
    auto en = enumerate(l.d->concl.cmd, initial_states(l.u), up);
    for (const auto& e : en.traces)
      for (const auto& rho : root_valuations(*l.d, l.u)) {
        const Game g = root_game(*l.d, e, rho);
        auto s = extract_strategy(*l.d, e.trace, e.witness, l.u, rho);
        ++games;
        if (check_winning_strategy(*s, g, l.u).verdict != Verdict::Pass) continue;
        ++won;
        if (solve_eve(g, l.u).verdict != Verdict::Pass)
          return {false, l.name + ": extraction wins but the solver does not on " + serialize(e.trace)};
      }
  }
  if (won == 0) return {false, "no extracted strategy won"};
  return {true, std::to_string(won) + " of " + std::to_string(games) + " extracted wins confirmed by the solver"};
}

Outcome corollary() {
  Outcome o;
  std::size_t programs = 0, returning = 0;
  std::vector<fs::path> all = proofs(kCorpus);
  for (const auto& p : proofs(kCorpus / "small")) all.push_back(p);
  for (const auto& p : all) {
    auto l = load(p);
    if (!l.d->concl.ctx.empty()) continue;
    ++programs;
    auto r = verify_corollary(*l.d, l.u);
    returning += r.returning;
    std::string why;
    if (r.error_steps > 0) why = std::to_string(r.error_steps) + " error steps";
    if (!r.failures.empty()) why = r.failures.front().reason;
    if (r.exhausted) why = "enumeration exhausted";
    if (r.started == 0) why = "no initial state satisfies P";
    if (!why.empty()) {
      o.ok = false;
      o.detail += l.name + ": " + why + "; ";
    }
  }
  if (returning == 0) {
    o.ok = false;
    o.detail += "no returning trace";
  }
  if (o.ok)
    o.detail = std::to_string(programs) + " programs with empty context, " + std::to_string(returning) +
               " returning traces end in Q * True, no error step";
  return o;
}

Outcome negative_suite() {
  const fs::path dir = kCorpus / "reject";
  auto u = parse_universe(slurp(dir / "reject.uni"));
  std::set<Rule> rules;
  std::size_t n = 0;
  for (const auto& p : proofs(dir)) {
    const auto text = slurp(p);
    std::istringstream first(text);
    std::string hash, expect, path, tag;
    first >> hash >> expect >> path >> tag;
    auto rule = parse_rule(tag);
    if (expect != "expect" || !rule) return {false, p.filename().string() + ": no expectation line"};
    auto r = check_proof(*parse_proof(text), u, {true});
    bool named = false;
    for (const auto& v : r.violations) named = named || (v.path == path && v.rule == *rule);
    if (!named) return {false, p.filename().string() + ": not rejected at " + path + " by " + tag};
    rules.insert(*rule);
    ++n;
  }
  if (n < 8) return {false, "only " + std::to_string(n) + " rejections"};

  // two threads that both claim x under precondition true
  auto ru = parse_universe(slurp(kCorpus / "small" / "par.uni"));
  auto d = parse_proof(R"P((par :pre "true * true" :cmd "x := 1 || x := 0" :post "true * true"
    (aff :pre "true" :post "true" :val "1")
    (aff :pre "true" :post "true" :val "0")))P");
  auto rep = check_proof(*d, ru);
  bool named = false;
  for (const auto& v : rep.violations) named = named || (v.path == "/0" && v.rule == Rule::Aff);
  if (!named) return {false, "race: not rejected at /0 by aff"};
  auto en = enumerate(d->concl.cmd, initial_states(ru), std::make_shared<const Universe>(ru));
  std::size_t races = 0;
  for (const auto& e : en.traces) {
    bool writes = false;
    for (const auto& s : e.trace.steps) writes = writes || s.pre.mem != s.post.mem;
    if (!writes) continue;
    ++races;
    if (solve_eve(root_game(*d, e), ru).verdict != Verdict::Fail)
      return {false, "race: Eve wins on " + serialize(e.trace)};
  }
  if (races == 0) return {false, "race: no trace writes x"};
  return {true, std::to_string(n) + " rejections over " + std::to_string(rules.size()) +
                    " rules, each at its named node; the race is rejected at /0 and Eve loses all " +
                    std::to_string(races) + " writing traces"};
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(SEPGAME_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("cannot start " + cmd);
  std::string out;
  char buf[4096];
  for (std::size_t k; (k = fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, k);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome determinism() {
  std::size_t compared = 0;
  for (const auto& [name, rules] : kProven) {
    const std::string in = "--allow-extensions -p " + (kCorpus / (name + ".prf")).string() + " -u " +
                           (kCorpus / (name + ".uni")).string();
    for (const char* verb : {"verify", "game"}) {
      const std::string base = std::string(verb) + " " + in;
      auto a = cli(base + " -j 1");
      auto b = cli(base + " -j 4");
      auto c = cli(base + " -j 4");
      if (a.code != 0) return {false, name + " " + verb + " exits " + std::to_string(a.code)};
      if (a.out.empty()) return {false, name + " " + verb + " printed nothing"};
      if (a.out != b.out) return {false, name + " " + verb + " differs between -j 1 and -j 4"};
      if (b.out != c.out) return {false, name + " " + verb + " differs between two runs"};
      compared += 3;
    }
  }
  return {true, std::to_string(compared) + " verify/game outputs byte-identical across runs and -j 1/4"};
}

}  // namespace

int main() {
  criterion("C1", "trace algebra", 30, trace_algebra);
  criterion("C2", "proven programs win their games", 300, proven_programs);
  criterion("C3", "solver agrees with extraction", 0, solver_agreement);
  criterion("C4", "corollary", 0, corollary);
  criterion("C5", "negative suite", 0, negative_suite);
  criterion("C6", "deterministic output", 0, determinism);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
