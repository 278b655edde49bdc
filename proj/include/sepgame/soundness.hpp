#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sepgame/derivation.hpp"
#include "sepgame/game.hpp"
#include "sepgame/semantics.hpp"

namespace sepgame {

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eve's strategy for SGame(t) read off the derivation. The witness must
/// come from ⟦C⟧ for the derivation's command, with returns matching the
/// game. Eve keeps one logical state per running thread, per active frame
/// and per hidden resource; she splits and merges them where the proof
/// enters and leaves Par, Frame and Res, and answers every step with the
/// footprint of the running thread. Throws ExtractionError when the witness
/// does not follow the derivation's shape.
std::shared_ptr<const Strategy> extract_strategy(const Derivation& d, const Trace& t, const WitnessPtr& w,
                                                 const Universe& u, const Valuation& rho = {});

/// Disagreements noticed while the strategy was played: the right premise of
/// a Conj failing where the left one is followed, or a release under a Conj
/// with more than one way to satisfy the invariant.
std::vector<std::string> extraction_alarms(const Strategy& s);

/// The game the root sequent poses on an enumerated trace.
Game root_game(const Derivation& d, const Enumerated& e, const Valuation& rho = {});

/// Valuations of the root's free logical variables.
std::vector<Valuation> root_valuations(const Derivation& d, const Universe& u);

/// Initial machine states: the universe's init states with permissions forgotten.
std::vector<MachineState> initial_states(const Universe& u);

struct VerifyOptions {
  std::size_t jobs = 1;
  CheckOptions check;
  EnumerateOptions enumerate;
};

struct GameFailure {
  std::size_t trace_index = 0;
  Trace trace;
  bool returns = false;
  Valuation rho;
  CheckResult result;
};

struct VerifyReport {
  std::size_t traces = 0;
  std::size_t returning = 0;
  std::size_t games = 0;
  std::size_t passed = 0;
  std::size_t played = 0;  // games where some initial state satisfies P
  std::size_t unknown = 0;
  std::size_t not_liftable = 0;  // traces ending in an error step: Eve has no move there
  std::size_t max_nodes = 0;
  bool exhausted = false;
  std::vector<GameFailure> failures;

  bool ok() const { return failures.empty() && unknown == 0 && !exhausted; }
};

/// Enumerates ⟦C⟧ over the universe and checks the extracted strategy of
/// every trace, for every valuation of the root's free variables. The
/// result does not depend on opts.jobs.
VerifyReport verify_proof(const Derivation& d, const Universe& u, const VerifyOptions& opts = {});

struct CorollaryFailure {
  Trace trace;
  std::string reason;
};

struct CorollaryReport {
  std::size_t traces = 0;
  std::size_t started = 0;  // traces whose source splits as P ∗ True
  std::size_t returning = 0;
  std::size_t error_steps = 0;
  bool exhausted = false;
  std::vector<CorollaryFailure> failures;

  bool ok() const { return failures.empty() && error_steps == 0 && !exhausted; }
};

/// With Γ empty and a passive environment: runs the extracted strategy from
/// every split σ_C ⊨ P of every init state, checks that no trace reaches an
/// error step and that every returning trace ends with σ_C ⊨ Q, so the final
/// memory satisfies Q ∗ True. Throws ExtractionError when Γ is not empty.
CorollaryReport verify_corollary(const Derivation& d, const Universe& u, const VerifyOptions& opts = {});

struct ReportOptions {
  std::set<std::string> extensions_used;
  bool replays = false;                  // add the counterexample play of every failure
  const CorollaryReport* corollary = nullptr;
};

std::string to_json(const VerifyReport& r, const Derivation& d, const Universe& u, const ReportOptions& o = {});
std::string to_json(const CorollaryReport& r, const Derivation& d, const Universe& u,
                    const std::set<std::string>& extensions_used);

}  // namespace sepgame
