#pragma once

#include <set>
#include <string>
#include <vector>

#include "sepgame/derivation.hpp"
#include "sepgame/universe.hpp"

namespace sepgame {

struct Violation {
  std::string path;  // "/" for the root, "/0/1" for the second premise of its first premise
  Rule rule = Rule::Aff;
  std::string reason;
};

struct ProofReport {
  Sequent conclusion;
  std::vector<Violation> violations;
  std::set<std::string> extensions_used;

  bool accepted() const { return violations.empty(); }
};

struct ProofOptions {
  bool allow_extensions = false;
};

/// Checks every node against its rule schema and side conditions. Semantic
/// side conditions (entailment, precision) are decided over the universe.
ProofReport check_proof(const Derivation& d, const Universe& u, const ProofOptions& opts = {});

/// Canonical text of a formula up to associativity and commutativity of ∗
/// and ∧ and renaming of bound logical variables.
std::string normal_form(const Formula& f);
bool same_formula(const Formula& a, const Formula& b);

/// Program variables a formula talks about, owned ones included.
std::set<std::string> program_vars(const Formula& f);
/// Variables a command may assign.
std::set<std::string> modified_vars(const Command& c);

/// [{"node-path", "rule", "reason", "universe"}, ...]
std::string violations_json(const ProofReport& r, const Universe& u);

}  // namespace sepgame
