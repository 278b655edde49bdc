#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sepgame/ast.hpp"

namespace sepgame {

/// Γ ⊢ {P} C {Q}
struct Sequent {
  Context ctx;
  FormulaPtr pre;
  CommandPtr cmd;
  FormulaPtr post;
};

enum class Rule {
  Aff,
  Store,
  Load,
  Seq,
  If,
  Conj,
  Res,
  With,
  Par,
  Frame,
  ExtSkip,
  ExtWhile,
  ExtConseq,
  ExtAlloc,
  ExtDispose,
};

std::string to_string(Rule r);
std::optional<Rule> parse_rule(const std::string& tag);
bool is_extension(Rule r);
std::size_t arity(Rule r);

struct Derivation;
using DerivationPtr = std::shared_ptr<const Derivation>;

struct Derivation {
  Rule rule = Rule::Aff;
  Sequent concl;
  FormulaPtr frame;      // Frame: R
  FormulaPtr invariant;  // Res: J, ExtWhile: I
  ExprPtr val;           // axioms: the value of the schema's logical variable
  Perm perm;             // Load: permission of the read cell
  std::vector<DerivationPtr> kids;
  int line = 0;
  int col = 0;
};

/// Parenthesized prefix terms, one per rule:
///   (tag :ctx ((r "J") ...) :pre "P" :cmd "C" :post "Q" [params] premises...)
/// Premises inherit :ctx and :cmd from the conclusion when they omit them
/// (With removes r from the context, Res adds r:J). Parameters are
/// :R (frame), :J (resource invariant), :inv (loop invariant), :val, :perm.
DerivationPtr parse_proof(const std::string& text);

/// Prints every field explicitly; parse_proof(print_proof(d)) re-reads d.
std::string print_proof(const Derivation& d);

}  // namespace sepgame
