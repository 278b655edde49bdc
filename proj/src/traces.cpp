#include "sepgame/traces.hpp"

#include <algorithm>
#include <sstream>

#include "sepgame/parser.hpp"

namespace sepgame {

Trace empty_trace(const MachineState& source, const MachineState& target) { return Trace{source, {}, target}; }

void validate(const Trace& t, const Universe& u) {
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    const std::string where = "step " + std::to_string(k + 1) + " (" + to_string(s.instr) + ")";
    if (s.error && k + 1 != t.steps.size()) throw TraceError(where + ": error step is not last");
    if (s.error) {
      if (s.post != s.pre) throw TraceError(where + ": error step must keep its state");
      if (s.instr.kind == Instr::Kind::Nop) continue;  // guard abort
    }
    auto outs = machine_step(s.pre, s.instr, u);
    const StepOutcome want{s.error, s.post};
    if (std::find(outs.begin(), outs.end(), want) == outs.end())
      throw TraceError(where + ": not a machine step from " + to_string(s.pre));
  }
}

Trace seq_compose(const Trace& t1, const Trace& t2) {
  if (t1.target != t2.source)
    throw TraceError("seq_compose: target " + to_string(t1.target) + " differs from source " + to_string(t2.source));
  if (t1.errors() && !t2.steps.empty()) throw TraceError("seq_compose: steps after an error");
  Trace out{t1.source, t1.steps, t2.target};
  out.steps.insert(out.steps.end(), t2.steps.begin(), t2.steps.end());
  return out;
}

Trace restrict(const std::vector<std::size_t>& f, const Trace& t) {
  Trace out{t.source, {}, t.target};
  std::size_t prev = 0;
  for (std::size_t k : f) {
    if (k <= prev || k > t.steps.size()) throw TraceError("restrict: map is not increasing into 1.." +
                                                          std::to_string(t.steps.size()));
    out.steps.push_back(t.steps[k - 1]);
    prev = k;
  }
  return out;
}

namespace {

void gen_shuffles(std::size_t p, std::size_t q, Shuffle& cur, std::vector<Shuffle>& out) {
  if (p == 0 && q == 0) {
    out.push_back(cur);
    return;
  }
  if (p > 0) {
    cur.push_back(0);
    gen_shuffles(p - 1, q, cur, out);
    cur.pop_back();
  }
  if (q > 0) {
    cur.push_back(1);
    gen_shuffles(p, q - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Shuffle> shuffles(std::size_t p, std::size_t q) {
  std::vector<Shuffle> out;
  Shuffle cur;
  gen_shuffles(p, q, cur, out);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fibres(const Shuffle& w) {
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < w.size(); ++i) (w[i] == 0 ? out.first : out.second).push_back(i + 1);
  return out;
}

std::vector<std::pair<Shuffle, Trace>> par_compose(const Trace& t1, const Trace& t2) {
  std::vector<std::pair<Shuffle, Trace>> out;
  if (t1.source != t2.source || t1.target != t2.target) return out;
  for (auto& w : shuffles(t1.length(), t2.length())) {
    Trace t{t1.source, {}, t1.target};
    std::size_t i = 0, j = 0;
    for (auto tag : w) t.steps.push_back(tag == 0 ? t1.steps[i++] : t2.steps[j++]);
    bool ok = true;
    for (std::size_t k = 0; k + 1 < t.steps.size(); ++k) ok = ok && !t.steps[k].error;
    if (ok) out.emplace_back(std::move(w), std::move(t));
  }
  return out;
}

MachineState hide(const std::string& r, const MachineState& s) {
  MachineState out = s;
  out.locked.erase(r);
  return out;
}

Trace hide(const std::string& r, const Trace& t) {
  Trace out{hide(r, t.source), {}, hide(r, t.target)};
  for (const auto& s : t.steps) {
    CodeTransition c{hide(r, s.pre), s.instr, hide(r, s.post), s.error};
    if (s.instr.is_lock() && s.instr.name == r) c.instr = Instr::nop();
    out.steps.push_back(std::move(c));
  }
  return out;
}

std::string serialize(const Trace& t) {
  std::string out = "source " + to_string(t.source) + "\n";
  for (const auto& s : t.steps)
    out += std::string("step ") + (s.error ? "error " : "ok ") + to_string(s.instr) + " | " + to_string(s.pre) +
           " -> " + to_string(s.post) + "\n";
  out += "target " + to_string(t.target) + "\n";
  return out;
}

namespace {

Trace parse_lines(const std::vector<std::pair<int, std::string>>& lines) {
  Trace t;
  bool have_source = false;
  bool have_target = false;
  for (const auto& [no, line] : lines) {
    auto fail = [&, no = no](const std::string& msg) -> void { throw ParseError(msg, no, 1); };
    try {
      if (line.rfind("source ", 0) == 0) {
        if (have_source) fail("duplicate source");
        t.source = parse_machine_state(line.substr(7));
        have_source = true;
      } else if (line.rfind("target ", 0) == 0) {
        if (!have_source || have_target) fail("target out of place");
        t.target = parse_machine_state(line.substr(7));
        have_target = true;
      } else if (line.rfind("step ", 0) == 0) {
        if (!have_source || have_target) fail("step out of place");
        std::string rest = line.substr(5);
        CodeTransition c;
        if (rest.rfind("ok ", 0) == 0) {
          rest = rest.substr(3);
        } else if (rest.rfind("error ", 0) == 0) {
          c.error = true;
          rest = rest.substr(6);
        } else {
          fail("step status must be ok or error");
        }
        auto bar = rest.find(" | ");
        auto arrow = rest.find(" -> ");
        if (bar == std::string::npos || arrow == std::string::npos || arrow < bar) fail("malformed step");
        c.instr = parse_instr(rest.substr(0, bar));
        c.pre = parse_machine_state(rest.substr(bar + 3, arrow - bar - 3));
        c.post = parse_machine_state(rest.substr(arrow + 4));
        t.steps.push_back(std::move(c));
      } else {
        fail("unrecognised line '" + line + "'");
      }
    } catch (const ParseError& e) {
      if (e.line() == no) throw;
      throw ParseError(e.what(), no, 1);
    }
  }
  if (!have_source || !have_target) throw ParseError("trace needs source and target", lines.empty() ? 1 : lines.back().first, 1);
  return t;
}

}  // namespace

std::vector<Trace> parse_traces(const std::string& text) {
  std::vector<Trace> out;
  std::vector<std::pair<int, std::string>> block;
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') {
      if (!block.empty()) out.push_back(parse_lines(block));
      block.clear();
      continue;
    }
    block.emplace_back(no, line);
  }
  if (!block.empty()) out.push_back(parse_lines(block));
  return out;
}

Trace parse_trace(const std::string& text) {
  auto ts = parse_traces(text);
  if (ts.size() != 1) throw ParseError("expected exactly one trace", 1, 1);
  return ts.front();
}

}  // namespace sepgame
