// sepgame: enumerate traces, check proofs, verify them through the game.
//
// Exit codes: 0 pass, 1 rejection or counterexample, 2 usage or input error,
// 3 a budget ran out before an answer.

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "sepgame/derivation.hpp"
#include "sepgame/parser.hpp"
#include "sepgame/proof.hpp"
#include "sepgame/soundness.hpp"

using namespace sepgame;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kBudget = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string program;
  std::string proof;
  std::string universe;
  std::string output;
  bool allow_extensions = false;
  bool replays = false;
  std::size_t max_traces = 200000;
  std::size_t max_nodes = 4'000'000;
  std::size_t jobs = 1;
  long trace = -1;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Inputs {
  Universe u;
  CommandPtr program;
  DerivationPtr proof;
};

Inputs load(const Config& c, bool need_proof) {
  if (need_proof && c.proof.empty()) throw InputError("this verb needs a proof (-p)");
  Inputs in;
  try {
    in.u = parse_universe(slurp(c.universe));
  } catch (const ParseError& e) {
    throw InputError(c.universe + ":" + e.what());
  }
  if (!c.proof.empty()) {
    try {
      in.proof = parse_proof(slurp(c.proof));
    } catch (const ParseError& e) {
      throw InputError(c.proof + ":" + e.what());
    }
  }
  if (!c.program.empty()) {
    try {
      in.program = parse_program(slurp(c.program));
    } catch (const ParseError& e) {
      throw InputError(c.program + ":" + e.what());
    }
  } else if (in.proof) {
    in.program = in.proof->concl.cmd;
  } else {
    throw InputError("no program given");
  }
  return in;
}

EnumerateOptions enum_opts(const Config& c) {
  EnumerateOptions o;
  o.max_traces = c.max_traces;
  return o;
}

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < jobs; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

// The proof must be about the program the user named.
bool same_program(const Inputs& in, std::ostream& out) {
  if (!in.proof || *in.proof->concl.cmd == *in.program) return true;
  out << "the proof is about `" << to_string(*in.proof->concl.cmd) << "`, not `" << to_string(*in.program) << "`\n";
  return false;
}

int cmd_run(const Config& c, std::ostream& out) {
  auto in = load(c, false);
  auto up = std::make_shared<const Universe>(in.u);
  auto en = enumerate(in.program, initial_states(in.u), up, enum_opts(c));
  std::size_t returning = 0;
  for (std::size_t i = 0; i < en.traces.size(); ++i) {
    const auto& e = en.traces[i];
    returning += e.returns;
    out << "# trace " << i << (e.returns ? " returns" : "") << "\n" << serialize(e.trace) << "\n";
  }
  out << en.traces.size() << " traces, " << returning << " returning\n";
  if (en.exhausted) {
    out << "trace budget exhausted\n";
    return kBudget;
  }
  return kPass;
}

json check_json(const ProofReport& r, const Universe& u) {
  json j;
  j["accepted"] = r.accepted();
  j["violations"] = json::parse(violations_json(r, u));
  j["extension_rules_used"] = r.extensions_used;
  return j;
}

int cmd_check(const Config& c, std::ostream& out) {
  auto in = load(c, true);
  if (!same_program(in, out)) return kFail;
  auto r = check_proof(*in.proof, in.u, {c.allow_extensions});
  out << check_json(r, in.u).dump(2) << "\n";
  return r.accepted() ? kPass : kFail;
}

int cmd_verify(const Config& c, std::ostream& out) {
  auto in = load(c, true);
  if (!same_program(in, out)) return kFail;
  auto checked = check_proof(*in.proof, in.u, {c.allow_extensions});
  if (!checked.accepted()) {
    out << check_json(checked, in.u).dump(2) << "\n";
    return kFail;
  }
  VerifyOptions o;
  o.jobs = c.jobs;
  o.enumerate = enum_opts(c);
  o.check.max_nodes = c.max_nodes;
  auto rep = verify_proof(*in.proof, in.u, o);
  std::optional<CorollaryReport> cor;
  if (in.proof->concl.ctx.empty()) cor = verify_corollary(*in.proof, in.u, o);
  ReportOptions ro;
  ro.extensions_used = checked.extensions_used;
  ro.replays = c.replays;
  ro.corollary = cor ? &*cor : nullptr;
  out << to_json(rep, *in.proof, in.u, ro);
  const bool failed = !rep.failures.empty() && rep.failures.size() > rep.unknown;
  if (failed || (cor && (!cor->failures.empty() || cor->error_steps > 0))) return kFail;
  if (rep.unknown > 0 || rep.exhausted || (cor && cor->exhausted)) return kBudget;
  return kPass;
}

// One play of the strategy: the first winning start, then the first winning
// Adam move and the first Eve answer at every step, then Adam's close.
std::vector<SeparatedState> sample_play(const Strategy& s, const Game& g, const Universe& u, std::string& note) {
  std::vector<SeparatedState> play;
  NodePtr n;
  for (const auto& x : enumerate_separations(g.state_at(1), g.alphabet, u))
    if ((n = s.start(x))) {
      play.push_back(x);
      break;
    }
  if (!n) {
    note = "no initial separation satisfies the precondition";
    return play;
  }
  auto adam = [&](std::size_t pos, bool must_win) -> std::optional<SeparatedState> {
    auto moves = enumerate_adam_moves(play.back(), g.state_at(pos), u);
    for (const auto& a : moves)
      if (sat_sep(a, g.predicate_at(pos), g.rho, u)) return a;
    if (!must_win && !moves.empty()) return moves.front();
    return std::nullopt;
  };
  for (std::size_t j = 1; j <= g.length(); ++j) {
    auto a = adam(2 * j, true);
    if (!a) {
      note = "the environment has no move that keeps the play winning before step " + std::to_string(j);
      return play;
    }
    play.push_back(*a);
    auto answers = s.respond(n, *a, j);
    if (answers.empty()) {
      note = "Eve has no answer at step " + std::to_string(j);
      return play;
    }
    play.push_back(answers.front().state);
    n = answers.front().node;
  }
  if (auto a = adam(g.positions(), false))
    play.push_back(*a);
  else
    note = "no environment move reaches the target";
  return play;
}

std::vector<std::size_t> selected(const Config& c, std::size_t n) {
  if (c.trace < 0) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  if (static_cast<std::size_t>(c.trace) >= n)
    throw InputError("trace index " + std::to_string(c.trace) + " out of range (" + std::to_string(n) + " traces)");
  return {static_cast<std::size_t>(c.trace)};
}

int cmd_game(const Config& c, std::ostream& out) {
  auto in = load(c, true);
  if (!same_program(in, out)) return kFail;
  auto up = std::make_shared<const Universe>(in.u);
  auto en = enumerate(in.program, initial_states(in.u), up, enum_opts(c));
  const auto picks = selected(c, en.traces.size());
  const auto rhos = root_valuations(*in.proof, in.u);
  std::vector<std::string> texts(picks.size());
  std::vector<Verdict> verdicts(picks.size(), Verdict::Pass);
  parallel_for(picks.size(), c.jobs, [&](std::size_t k) {
    const auto& e = en.traces[picks[k]];
    std::string text = "# trace " + std::to_string(picks[k]) + (e.returns ? " returns" : "") + "\n";
    for (const auto& rho : rhos) {
      const Game g = root_game(*in.proof, e, rho);
      std::string rho_text;
      for (const auto& [x, v] : rho) rho_text += " " + x + "=" + std::to_string(v);
      if (!rho_text.empty()) text += "# rho" + rho_text + "\n";
      try {
        auto s = extract_strategy(*in.proof, e.trace, e.witness, in.u, rho);
        CheckOptions co;
        co.max_nodes = c.max_nodes;
        auto r = check_winning_strategy(*s, g, in.u, co);
        std::string note;
        auto play = r.verdict == Verdict::Fail ? r.play : sample_play(*s, g, in.u, note);
        text += format_play(play, g, in.u);
        if (!note.empty()) text += "# " + note + "\n";
        text += "verdict " + to_string(r.verdict) + (r.reason.empty() ? "" : ": " + r.reason) + "\n";
        if (r.verdict != Verdict::Pass && verdicts[k] != Verdict::Fail) verdicts[k] = r.verdict;
      } catch (const ExtractionError& ex) {
        text += std::string("verdict fail: extraction: ") + ex.what() + "\n";
        verdicts[k] = Verdict::Fail;
      }
    }
    texts[k] = std::move(text);
  });
  int code = kPass;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    out << texts[k] << "\n";
    if (verdicts[k] == Verdict::Fail) code = kFail;
    if (verdicts[k] == Verdict::Unknown && code == kPass) code = kBudget;
  }
  if (en.exhausted && code == kPass) code = kBudget;
  return code;
}

int cmd_solve(const Config& c, std::ostream& out) {
  auto in = load(c, true);
  if (!same_program(in, out)) return kFail;
  auto up = std::make_shared<const Universe>(in.u);
  auto en = enumerate(in.program, initial_states(in.u), up, enum_opts(c));
  const auto picks = selected(c, en.traces.size());
  const auto rhos = root_valuations(*in.proof, in.u);
  std::vector<json> rows(picks.size() * rhos.size());
  std::vector<Verdict> verdicts(rows.size());
  parallel_for(rows.size(), c.jobs, [&](std::size_t i) {
    const auto& e = en.traces[picks[i / rhos.size()]];
    const auto& rho = rhos[i % rhos.size()];
    const Game g = root_game(*in.proof, e, rho);
    CheckOptions co;
    co.max_nodes = c.max_nodes;
    auto r = solve_eve(g, in.u, co);
    verdicts[i] = r.verdict;
    json row;
    row["trace_index"] = picks[i / rhos.size()];
    row["returns"] = e.returns;
    json rj = json::object();
    for (const auto& [x, v] : rho) rj[x] = v;
    row["rho"] = rj;
    row["verdict"] = r.verdict == Verdict::Pass ? "win" : r.verdict == Verdict::Fail ? "nowin" : "unknown";
    row["positions_solved"] = r.nodes;
    if (r.verdict == Verdict::Pass) {
      std::size_t starts = 0;
      for (const auto& x : enumerate_separations(g.state_at(1), g.alphabet, in.u)) starts += r.strategy->start(x) != nullptr;
      row["winning_starts"] = starts;
    } else if (!r.play.empty()) {
      row["losing_start"] = to_string(r.play.front());
    }
    rows[i] = std::move(row);
  });
  json j;
  j["program"] = to_string(*in.program);
  j["universe"] = in.u.describe();
  j["games"] = rows;
  out << j.dump(2) << "\n";
  int code = kPass;
  for (auto v : verdicts) {
    if (v == Verdict::Fail) code = kFail;
    if (v == Verdict::Unknown && code == kPass) code = kBudget;
  }
  if (en.exhausted && code == kPass) code = kBudget;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sepgame: concurrent separation logic through separation games"};
  app.require_subcommand(1);
  Config c;
  auto common = [&](CLI::App* sub, bool needs_program) {
    auto* prog = sub->add_option("program", c.program, "program file (.csl)");
    if (needs_program) prog->required();
    sub->add_option("-p,--proof", c.proof, "proof script (.prf)");
    sub->add_option("-u,--universe", c.universe, "universe file (.uni)")->required();
    sub->add_option("-o,--output", c.output, "write the report here instead of stdout");
    sub->add_option("--max-traces", c.max_traces, "trace enumeration budget");
    sub->add_option("-j,--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "enumerate the traces of a program");
  common(run, true);
  auto* check = app.add_subcommand("check", "check a proof script");
  common(check, false);
  auto* verify = app.add_subcommand("verify", "check a proof, then win its game on every trace");
  common(verify, false);
  auto* game = app.add_subcommand("game", "replay the extracted strategy on traces");
  common(game, false);
  auto* solve = app.add_subcommand("solve", "solve the games of the proof's sequent by brute force");
  common(solve, false);
  for (auto* sub : {check, verify, game, solve})
    sub->add_flag("--allow-extensions", c.allow_extensions, "accept the ext-* rules");
  for (auto* sub : {verify, game, solve}) {
    sub->add_option("--max-nodes", c.max_nodes, "game search budget per trace");
  }
  verify->add_flag("--emit-replays", c.replays, "include the counterexample play of each failure");
  for (auto* sub : {game, solve}) sub->add_option("-t,--trace", c.trace, "index of one trace (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  std::ostringstream report;
  int code = kPass;
  try {
    if (*run) code = cmd_run(c, report);
    if (*check) code = cmd_check(c, report);
    if (*verify) code = cmd_verify(c, report);
    if (*game) code = cmd_game(c, report);
    if (*solve) code = cmd_solve(c, report);
  } catch (const InputError& e) {
    std::cerr << "sepgame: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "sepgame: " << e.what() << "\n";
    return kUsage;
  }
  if (c.output.empty()) {
    std::cout << report.str();
  } else {
    std::ofstream f(c.output);
    if (!f) {
      std::cerr << "sepgame: cannot write " << c.output << "\n";
      return kUsage;
    }
    f << report.str();
  }
  return code;
}
