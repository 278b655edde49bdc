#include "sepgame/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <set>

namespace sepgame {

namespace {

enum class Tok { Ident, Int, Own, PermSuffix, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

// Multi-character symbols, longest first.
const char* const kSymbols[] = {"|->", ":=", "||", "/\\", "\\/", "=>", ";", "{", "}", "(", ")",
                                "[",   "]",  ",",  "=",   "+",   "*",  "~", ".", "-"};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.text = src.substr(i, j - i);
      t.kind = Tok::Ident;
      if (t.text.rfind("own_", 0) == 0) {
        // own_1, own_1/2, own_*
        while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '/' ||
                                  src[j] == '*'))
          ++j;
        t.text = src.substr(i, j - i);
        t.kind = Tok::Own;
      }
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (src.compare(i, 4, "|->_") == 0) {
      std::size_t j = i + 4;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '/')) ++j;
      t.kind = Tok::Sym;
      t.text = "|->";
      out.push_back(t);
      Token p;
      p.kind = Tok::PermSuffix;
      p.text = src.substr(i + 4, j - i - 4);
      p.line = line;
      p.col = col + 3;
      out.push_back(std::move(p));
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* sym : kSymbols) {
      const std::string s(sym);
      if (src.compare(i, s.size(), s) == 0) {
        t.kind = Tok::Sym;
        t.text = s;
        advance(s.size());
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

const std::set<std::string> kKeywords = {"skip", "while", "do",    "if",      "then",   "else",   "resource",
                                         "with", "when",  "alloc", "dispose", "true",   "false",  "emp",
                                         "forall", "exists"};

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  CommandPtr program_top() {
    auto c = program();
    expect_end();
    return c;
  }

  FormulaPtr formula_top() {
    for (const auto& t : toks_)
      if (t.kind == Tok::Ident) used_names_.insert(t.text);
    auto f = implication();
    expect_end();
    return f;
  }

  BExprPtr bexpr_top() {
    auto b = bexpr(false);
    expect_end();
    return b;
  }

  ExprPtr expr_top() {
    auto e = expr(true, true);
    expect_end();
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string> used_names_;
  int fresh_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }

  bool at_sym(const char* s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Sym && peek(ahead).text == s;
  }

  bool at_word(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", got " + got, t.line, t.col);
  }

  void expect_sym(const char* s) {
    if (!at_sym(s)) fail(std::string("expected '") + s + "'");
    ++pos_;
  }

  void expect_word(const char* s) {
    if (!at_word(s)) fail(std::string("expected '") + s + "'");
    ++pos_;
  }

  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected trailing input");
  }

  std::string identifier(bool allow_logical) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || kKeywords.count(t.text)) fail("expected identifier");
    if (!allow_logical && is_logical_var(t.text)) fail("logical variable not allowed in a program");
    ++pos_;
    return t.text;
  }

  // ---- expressions

  ExprPtr expr(bool allow_logical, bool allow_mul) {
    auto e = term(allow_logical, allow_mul);
    while (at_sym("+")) {
      ++pos_;
      e = Expr::add(e, term(allow_logical, allow_mul));
    }
    return e;
  }

  ExprPtr term(bool allow_logical, bool allow_mul) {
    auto e = factor(allow_logical);
    while (allow_mul && at_sym("*")) {
      ++pos_;
      e = Expr::mul(e, factor(allow_logical));
    }
    return e;
  }

  Value integer() {
    const Token& t = peek();
    Value v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) fail("integer out of range");
    ++pos_;
    return v;
  }

  ExprPtr factor(bool allow_logical) {
    const Token& t = peek();
    if (t.kind == Tok::Int) return Expr::lit(integer());
    if (at_sym("-") && peek(1).kind == Tok::Int) {
      ++pos_;
      return Expr::lit(-integer());
    }
    if (at_sym("(")) {
      ++pos_;
      auto e = expr(allow_logical, true);
      expect_sym(")");
      return e;
    }
    return Expr::var(identifier(allow_logical));
  }

  // ---- boolean guards

  BExprPtr bexpr(bool allow_logical) {
    auto b = band(allow_logical);
    while (at_sym("\\/")) {
      ++pos_;
      b = BExpr::disj(b, band(allow_logical));
    }
    return b;
  }

  BExprPtr band(bool allow_logical) {
    auto b = batom(allow_logical);
    while (at_sym("/\\")) {
      ++pos_;
      b = BExpr::conj(b, batom(allow_logical));
    }
    return b;
  }

  BExprPtr batom(bool allow_logical) {
    if (at_word("true")) {
      ++pos_;
      return BExpr::truth(true);
    }
    if (at_word("false")) {
      ++pos_;
      return BExpr::truth(false);
    }
    if (at_sym("(")) {
      const std::size_t save = pos_;
      try {
        ++pos_;
        auto b = bexpr(allow_logical);
        expect_sym(")");
        return b;
      } catch (const ParseError&) {
        pos_ = save;  // maybe a parenthesised expression on the left of '='
      }
    }
    auto l = expr(allow_logical, true);
    expect_sym("=");
    auto r = expr(allow_logical, true);
    return BExpr::eq(l, r);
  }

  // ---- commands

  CommandPtr program() {
    auto c = sequence();
    if (at_sym("||")) {
      ++pos_;
      return Command::par(c, program());
    }
    return c;
  }

  CommandPtr sequence() {
    auto c = statement();
    if (at_sym(";")) {
      ++pos_;
      return Command::seq(c, sequence());
    }
    return c;
  }

  CommandPtr statement() {
    if (at_sym("{")) {
      ++pos_;
      auto c = program();
      expect_sym("}");
      return c;
    }
    if (at_word("skip")) {
      ++pos_;
      return Command::skip();
    }
    if (at_word("while")) {
      ++pos_;
      auto b = bexpr(false);
      expect_word("do");
      return Command::loop(b, statement());
    }
    if (at_word("if")) {
      ++pos_;
      auto b = bexpr(false);
      expect_word("then");
      auto t = statement();
      expect_word("else");
      return Command::ite(b, t, statement());
    }
    if (at_word("resource")) {
      ++pos_;
      auto r = identifier(false);
      expect_word("do");
      return Command::resource(r, statement());
    }
    if (at_word("with")) {
      ++pos_;
      auto r = identifier(false);
      expect_word("when");
      auto b = bexpr(false);
      expect_word("do");
      return Command::with(r, b, statement());
    }
    if (at_word("dispose")) {
      ++pos_;
      expect_sym("(");
      auto e = expr(false, true);
      expect_sym(")");
      return Command::dispose(e);
    }
    if (at_sym("[")) {
      ++pos_;
      auto l = expr(false, true);
      expect_sym("]");
      expect_sym(":=");
      return Command::store(l, expr(false, true));
    }
    auto x = identifier(false);
    expect_sym(":=");
    if (at_sym("[")) {
      ++pos_;
      auto e = expr(false, true);
      expect_sym("]");
      return Command::load(x, e);
    }
    if (at_word("alloc")) {
      ++pos_;
      expect_sym("(");
      auto e = expr(false, true);
      expect_sym(")");
      return Command::alloc(x, e);
    }
    return Command::assign(x, expr(false, true));
  }

  // ---- formulas

  FormulaPtr implication() {
    auto f = disjunction();
    if (at_sym("=>")) {
      ++pos_;
      return Formula::implies(f, implication());
    }
    return f;
  }

  FormulaPtr disjunction() {
    auto f = conjunction();
    while (at_sym("\\/")) {
      ++pos_;
      f = Formula::disj(f, conjunction());
    }
    return f;
  }

  FormulaPtr conjunction() {
    auto f = separating();
    while (at_sym("/\\")) {
      ++pos_;
      f = Formula::conj(f, separating());
    }
    return f;
  }

  FormulaPtr separating() {
    auto f = unary();
    while (at_sym("*")) {
      ++pos_;
      f = Formula::star(f, unary());
    }
    return f;
  }

  FormulaPtr unary() {
    if (at_sym("~")) {
      ++pos_;
      return Formula::negate(unary());
    }
    if (at_word("forall") || at_word("exists")) {
      const bool all = peek().text == "forall";
      ++pos_;
      const Token& t = peek();
      auto x = identifier(true);
      if (!is_logical_var(x)) throw ParseError("quantified variable must be capitalised", t.line, t.col);
      expect_sym(".");
      auto body = implication();
      return all ? Formula::forall(x, body) : Formula::exists(x, body);
    }
    return atom();
  }

  Perm perm_text(const std::string& text, const Token& at) {
    auto p = parse_perm(text);
    if (!p) throw ParseError("permission '" + text + "' outside (0,1]", at.line, at.col);
    return *p;
  }

  std::string fresh_name() {
    for (;;) {
      std::string n = "X" + std::to_string(fresh_++);
      if (!used_names_.count(n)) {
        used_names_.insert(n);
        return n;
      }
    }
  }

  FormulaPtr atom() {
    if (at_word("emp")) {
      ++pos_;
      return Formula::emp();
    }
    if (at_word("true")) {
      ++pos_;
      return Formula::truth(true);
    }
    if (at_word("false")) {
      ++pos_;
      return Formula::truth(false);
    }
    if (peek().kind == Tok::Own) {
      const Token t = peek();
      ++pos_;
      const std::string p = t.text.substr(4);
      expect_sym("(");
      auto x = identifier(false);
      expect_sym(")");
      if (p == "*") return Formula::own_any(x);
      return Formula::own(perm_text(p, t), x);
    }
    if (at_sym("(")) {
      const std::size_t save = pos_;
      std::optional<ParseError> expr_error;
      try {
        return expression_atom();
      } catch (const ParseError& e) {
        expr_error = e;
        pos_ = save;
      }
      ++pos_;
      auto f = implication();
      expect_sym(")");
      return f;
    }
    return expression_atom();
  }

  FormulaPtr expression_atom() {
    auto l = expr(true, false);
    if (at_sym("=")) {
      ++pos_;
      return Formula::eq(l, expr(true, false));
    }
    if (at_sym("|->")) {
      ++pos_;
      Perm p = Perm::full();
      if (peek().kind == Tok::PermSuffix) {
        p = perm_text(peek().text, peek());
        ++pos_;
      }
      if (at_sym("-") && peek(1).kind != Tok::Int) {
        ++pos_;
        auto x = fresh_name();
        return Formula::exists(x, Formula::points_to(l, p, Expr::var(x)));
      }
      return Formula::points_to(l, p, expr(true, false));
    }
    fail("expected '=' or '|->'");
  }
};

}  // namespace

CommandPtr parse_program(const std::string& text) { return Parser(text).program_top(); }
FormulaPtr parse_formula(const std::string& text) { return Parser(text).formula_top(); }
BExprPtr parse_bexpr(const std::string& text) { return Parser(text).bexpr_top(); }
ExprPtr parse_expr(const std::string& text) { return Parser(text).expr_top(); }

std::vector<SExpr> parse_sexprs(const std::string& text) {
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&]() {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  auto skip_space = [&]() {
    while (i < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[i]))) {
        advance();
      } else if (text[i] == '#') {
        while (i < text.size() && text[i] != '\n') advance();
      } else {
        break;
      }
    }
  };

  std::vector<SExpr> top;
  std::vector<SExpr> stack;
  auto emit = [&](SExpr e) {
    if (stack.empty())
      top.push_back(std::move(e));
    else
      stack.back().items.push_back(std::move(e));
  };

  for (;;) {
    skip_space();
    if (i >= text.size()) break;
    const char c = text[i];
    if (c == '(') {
      SExpr e;
      e.is_list = true;
      e.line = line;
      e.col = col;
      stack.push_back(std::move(e));
      advance();
    } else if (c == ')') {
      if (stack.empty()) throw ParseError("unbalanced ')'", line, col);
      advance();
      SExpr e = std::move(stack.back());
      stack.pop_back();
      emit(std::move(e));
    } else if (c == '"') {
      SExpr e;
      e.quoted = true;
      e.line = line;
      e.col = col;
      advance();
      for (;;) {
        if (i >= text.size()) throw ParseError("unterminated string", e.line, e.col);
        if (text[i] == '"') {
          advance();
          break;
        }
        if (text[i] == '\\' && i + 1 < text.size() && text[i + 1] == '"') {
          advance();
        }
        e.text.push_back(text[i]);
        advance();
      }
      emit(std::move(e));
    } else {
      SExpr e;
      e.line = line;
      e.col = col;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '(' &&
             text[i] != ')' && text[i] != '"')
        e.text.push_back(text[i]), advance();
      emit(std::move(e));
    }
  }
  if (!stack.empty()) throw ParseError("unbalanced '('", stack.back().line, stack.back().col);
  return top;
}

}  // namespace sepgame
