#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sfcbip/diagnostics.hpp"

namespace sfcbip {

enum class Tok {
  Ident,
  Int,
  LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Semi, Colon, Comma, Dot, DotDot, At,
  Arrow,   // ->
  Assign,  // :=
  Eq1,     // =
  Lt, Le, Gt, Ge, EqEq, Ne,
  Plus, Minus, Star, Bang, AndAnd, OrOr,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

std::vector<Token> tokenize(std::string_view src);

const char* tok_name(Tok t);

/// Forward-only cursor shared by the DSL parsers.
class TokenCursor {
 public:
  explicit TokenCursor(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const;
  bool at(Tok t) const { return peek().kind == t; }
  bool at_keyword(std::string_view kw) const;
  Token next();
  Token expect(Tok t, std::string_view what);
  void expect_keyword(std::string_view kw);
  bool accept(Tok t);
  bool accept_keyword(std::string_view kw);
  std::string expect_ident(std::string_view what);
  [[noreturn]] void fail(const std::string& msg) const;

 private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

}  // namespace sfcbip
