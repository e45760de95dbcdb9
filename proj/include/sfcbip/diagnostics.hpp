#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sfcbip {

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct Diagnostic {
  std::string code;
  std::string message;
  SourcePos pos;

  std::string str() const;
};

using Diagnostics = std::vector<Diagnostic>;

std::string format_diagnostics(const Diagnostics& diags);

/// Thrown by the hand-written parsers; carries the first syntax error.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, SourcePos pos);
  const SourcePos& pos() const { return pos_; }
  Diagnostic diagnostic() const;

 private:
  SourcePos pos_;
  std::string raw_;
};

}  // namespace sfcbip
