#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sepgame/ast.hpp"

namespace sepgame {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

CommandPtr parse_program(const std::string& text);
FormulaPtr parse_formula(const std::string& text);
BExprPtr parse_bexpr(const std::string& text);
/// Accepts both program and logical variables.
ExprPtr parse_expr(const std::string& text);

/// Generic s-expression node used by the proof script reader.
struct SExpr {
  bool is_list = false;
  bool quoted = false;
  std::string text;
  std::vector<SExpr> items;
  int line = 1;
  int col = 1;
};

/// Reads every top-level s-expression. `#` starts a line comment.
std::vector<SExpr> parse_sexprs(const std::string& text);

}  // namespace sepgame
