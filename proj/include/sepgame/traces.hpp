#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sepgame/machine.hpp"

namespace sepgame {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CodeTransition {
  MachineState pre;
  Instr instr;
  MachineState post;
  bool error = false;

  bool operator==(const CodeTransition& o) const {
    return error == o.error && pre == o.pre && post == o.post && instr == o.instr;
  }
};

/// Environment transitions are implicit: between consecutive code steps, and
/// before the first and after the last, the environment may move the state
/// anywhere.
struct Trace {
  MachineState source;
  std::vector<CodeTransition> steps;
  MachineState target;

  std::size_t length() const { return steps.size(); }
  bool errors() const { return !steps.empty() && steps.back().error; }

  bool operator==(const Trace& o) const {
    return source == o.source && target == o.target && steps == o.steps;
  }
};

Trace empty_trace(const MachineState& source, const MachineState& target);

/// Throws TraceError when a step is not a machine step or an error is not last.
/// Error steps labelled nop are the abort of a guard and are admitted.
void validate(const Trace& t, const Universe& u);

Trace seq_compose(const Trace& t1, const Trace& t2);

/// f is 1-based and strictly increasing into 1..length(t).
Trace restrict(const std::vector<std::size_t>& f, const Trace& t);

/// tags[i] is 0 when position i+1 belongs to the left trace, 1 for the right.
using Shuffle = std::vector<std::uint8_t>;

std::vector<Shuffle> shuffles(std::size_t p, std::size_t q);
/// The two fibres of a shuffle as 1-based increasing maps.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fibres(const Shuffle& w);

/// All (shuffle, t) with the two restrictions of t equal to t1 and t2.
/// Interleavings that would put a step after an error are skipped.
std::vector<std::pair<Shuffle, Trace>> par_compose(const Trace& t1, const Trace& t2);

MachineState hide(const std::string& r, const MachineState& s);
Trace hide(const std::string& r, const Trace& t);

std::string serialize(const Trace& t);
Trace parse_trace(const std::string& text);
/// Several traces separated by blank lines.
std::vector<Trace> parse_traces(const std::string& text);

}  // namespace sepgame
