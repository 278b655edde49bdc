#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sepgame/traces.hpp"

namespace sepgame {

struct Witness;
using WitnessPtr = std::shared_ptr<const Witness>;

/// Why a trace belongs to a transition system. The shape follows the system
/// that produced it, so it can be replayed against the same system.
struct Witness {
  enum class Kind {
    Atom,       // the trace is empty or the single machine step
    SeqPrefix,  // the trace is in the first component
    SeqSplit,   // first k steps return in the first component, rest in the second
    Par,        // shuffle of traces of the two components
    Hide,       // preimage under hide(r)
    Gate,       // guard evaluated to the gate's polarity
    Abort,      // guard aborts
    Union,      // member of the k-th alternative
    Loop,       // one unfolding of a while loop
  };

  Kind kind = Kind::Atom;
  bool returns = false;
  std::size_t k = 0;
  Shuffle shuffle;
  Trace preimage;
  std::vector<WitnessPtr> kids;
};

enum class Membership { NotIn, In, Returns };

class TransitionSystem {
 public:
  virtual ~TransitionSystem() = default;

  /// A witness for t ∈ T, or for t returning in T when need_return is set.
  virtual WitnessPtr find(const Trace& t, bool need_return) const = 0;

  Membership member(const Trace& t, WitnessPtr* witness = nullptr) const;
};

using TSPtr = std::shared_ptr<const TransitionSystem>;

TSPtr ts_atom(const Instr& m, std::shared_ptr<const Universe> u);
TSPtr ts_seq(TSPtr a, TSPtr b);
TSPtr ts_par(TSPtr a, TSPtr b);
TSPtr ts_hide(const std::string& r, TSPtr a);
/// whentrue(B) / whenfalse(B), depending on polarity.
TSPtr ts_when(BExprPtr b, bool polarity, TSPtr a);
TSPtr ts_when_abort(BExprPtr b);
TSPtr ts_union(std::vector<TSPtr> alternatives);
TSPtr ts_inside(const std::string& r, TSPtr a, std::shared_ptr<const Universe> u);

/// ⟦C⟧ over the universe.
TSPtr denote(const CommandPtr& c, std::shared_ptr<const Universe> u);

struct Enumerated {
  Trace trace;
  bool returns = false;
  WitnessPtr witness;
};

struct EnumerationResult {
  std::vector<Enumerated> traces;
  bool exhausted = false;  // the trace budget ran out before the search finished
};

struct EnumerateOptions {
  std::size_t max_traces = 200000;
  /// Overrides the universe's maximal length when set.
  std::optional<std::size_t> max_length;
};

/// Every trace of ⟦C⟧ from the initial states, up to the universe's maximal
/// length, with environment moves drawn from the universe's policy.
EnumerationResult enumerate(const CommandPtr& c, const std::vector<MachineState>& inits,
                            std::shared_ptr<const Universe> u, const EnumerateOptions& opts = {});

}  // namespace sepgame
