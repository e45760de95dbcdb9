#include "sfcbip/lexer.hpp"

#include <cctype>
#include <sstream>

namespace sfcbip {

std::string Diagnostic::str() const {
  std::ostringstream os;
  if (pos.line > 0) os << pos.line << ":" << pos.column << ": ";
  os << code << ": " << message;
  return os.str();
}

std::string format_diagnostics(const Diagnostics& diags) {
  std::string out;
  for (const auto& d : diags) {
    out += d.str();
    out += '\n';
  }
  return out;
}

SyntaxError::SyntaxError(const std::string& message, SourcePos pos)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
      pos_(pos),
      raw_(message) {}

Diagnostic SyntaxError::diagnostic() const { return {"syntax", raw_, pos_}; }

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::DotDot: return "'..'";
    case Tok::At: return "'@'";
    case Tok::Arrow: return "'->'";
    case Tok::Assign: return "':='";
    case Tok::Eq1: return "'='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::Ne: return "'!='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Bang: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::End: return "end of input";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourcePos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
    Tok kind;
    std::size_t len = 2;
    if (two('.', '.')) kind = Tok::DotDot;
    else if (two('-', '>')) kind = Tok::Arrow;
    else if (two(':', '=')) kind = Tok::Assign;
    else if (two('<', '=')) kind = Tok::Le;
    else if (two('>', '=')) kind = Tok::Ge;
    else if (two('=', '=')) kind = Tok::EqEq;
    else if (two('!', '=')) kind = Tok::Ne;
    else if (two('&', '&')) kind = Tok::AndAnd;
    else if (two('|', '|')) kind = Tok::OrOr;
    else {
      len = 1;
      switch (c) {
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case ';': kind = Tok::Semi; break;
        case ':': kind = Tok::Colon; break;
        case ',': kind = Tok::Comma; break;
        case '.': kind = Tok::Dot; break;
        case '@': kind = Tok::At; break;
        case '=': kind = Tok::Eq1; break;
        case '<': kind = Tok::Lt; break;
        case '>': kind = Tok::Gt; break;
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '!': kind = Tok::Bang; break;
        default:
          throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
      }
    }
    out.push_back({kind, std::string(src.substr(i, len)), pos});
    advance(len);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

const Token& TokenCursor::peek(std::size_t ahead) const {
  std::size_t k = i_ + ahead;
  if (k >= toks_.size()) return toks_.back();
  return toks_[k];
}

bool TokenCursor::at_keyword(std::string_view kw) const {
  return peek().kind == Tok::Ident && peek().text == kw;
}

Token TokenCursor::next() {
  Token t = peek();
  if (i_ < toks_.size() - 1) ++i_;
  return t;
}

Token TokenCursor::expect(Tok t, std::string_view what) {
  if (!at(t)) {
    fail(std::string("expected ") + tok_name(t) + " " + std::string(what) + ", found " +
         (peek().kind == Tok::End ? std::string("end of input") : "'" + peek().text + "'"));
  }
  return next();
}

void TokenCursor::expect_keyword(std::string_view kw) {
  if (!at_keyword(kw)) {
    fail("expected '" + std::string(kw) + "', found " +
         (peek().kind == Tok::End ? std::string("end of input") : "'" + peek().text + "'"));
  }
  next();
}

bool TokenCursor::accept(Tok t) {
  if (!at(t)) return false;
  next();
  return true;
}

bool TokenCursor::accept_keyword(std::string_view kw) {
  if (!at_keyword(kw)) return false;
  next();
  return true;
}

std::string TokenCursor::expect_ident(std::string_view what) {
  return expect(Tok::Ident, what).text;
}

void TokenCursor::fail(const std::string& msg) const { throw SyntaxError(msg, peek().pos); }

}  // namespace sfcbip
