#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sfcbip/diagnostics.hpp"
#include "sfcbip/lexer.hpp"

namespace sfcbip {

enum class Type { Int, Bool };

const char* type_name(Type t);

/// Booleans are stored as 0/1 so that valuations are plain integer vectors.
using Value = std::int64_t;

struct VarDecl {
  std::string name;
  Type type = Type::Int;
  Value lo = 0;
  Value hi = 1;
  Value init = 0;

  bool admits(Value v) const { return v >= lo && v <= hi; }
  static VarDecl boolean(std::string name, bool init = false) {
    return {std::move(name), Type::Bool, 0, 1, init ? 1 : 0};
  }
  static VarDecl integer(std::string name, Value lo, Value hi, Value init) {
    return {std::move(name), Type::Int, lo, hi, init};
  }
  bool operator==(const VarDecl&) const = default;
};

std::string format_value(const VarDecl& d, Value v);
std::string format_decl_type(const VarDecl& d);

/// Total valuation over an ordered declaration list (values indexed like the decls).
struct Valuation {
  std::vector<Value> values;

  static Valuation initial(std::span<const VarDecl> decls);
  bool operator==(const Valuation&) const = default;
  auto operator<=>(const Valuation&) const = default;
};

enum class Op {
  IntLit, BoolLit, Var,
  Neg, Not,
  Add, Sub, Mul,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or,
  Extern,  // opaque boolean atom supplied by a parse hook (invariant atoms)
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op = Op::IntLit;
  Value value = 0;       // literals; extern atom id
  std::string name;      // variable name (possibly dotted) or extern text
  int slot = -1;         // resolved storage slot for Var
  ExprPtr lhs;
  ExprPtr rhs;
  SourcePos pos;
};

ExprPtr make_int(Value v);
ExprPtr make_bool(bool b);
ExprPtr make_var(std::string name, int slot = -1);
ExprPtr make_unary(Op op, ExprPtr e);
ExprPtr make_binary(Op op, ExprPtr l, ExprPtr r);
ExprPtr make_extern(Value id, std::string text);

bool is_binary(Op op);
bool is_comparison(Op op);

struct ScopeEntry {
  int slot;
  Type type;
};
using Scope = std::function<std::optional<ScopeEntry>(const std::string&)>;

Scope scope_of(std::span<const VarDecl> decls);

/// Type-checks `e` against `scope` and returns a copy with variable slots bound.
/// Returns nullptr (with diagnostics appended) on failure.
ExprPtr resolve_expr(const ExprPtr& e, const Scope& scope, Diagnostics& diags,
                     std::optional<Type> expected = std::nullopt);

std::optional<Type> type_of(const Expr& e, const Scope& scope, Diagnostics& diags);

/// Evaluates a resolved expression. Extern nodes are not evaluable here.
Value eval_expr(const Expr& e, std::span<const Value> slots);
inline bool eval_bool(const Expr& e, std::span<const Value> slots) { return eval_expr(e, slots) != 0; }

/// Rewrites every variable through `fn` (which may return a replacement subtree).
ExprPtr map_vars(const ExprPtr& e, const std::function<ExprPtr(const Expr&)>& fn);

void collect_vars(const Expr& e, std::set<std::string>& out);
bool contains_extern(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);

std::string to_string(const Expr& e);

struct Stmt {
  std::string target;
  ExprPtr value;
  int slot = -1;
  Value lo = 0;
  Value hi = 0;
  SourcePos pos;
};

using Program = std::vector<Stmt>;

struct RangeViolation {
  std::string variable;
  Value value = 0;
  Value lo = 0;
  Value hi = 0;

  std::string str() const;
};

Program resolve_program(const Program& p, std::span<const VarDecl> decls, Diagnostics& diags);

Diagnostics typecheck(const ExprPtr& e, std::span<const VarDecl> decls);
Diagnostics typecheck(const Program& p, std::span<const VarDecl> decls);

/// Applies the statements of a resolved program in order, in place.
std::optional<RangeViolation> exec_in_place(const Program& p, std::span<Value> slots);

std::variant<Valuation, RangeViolation> exec_program(const Program& p, const Valuation& f);

/// Variables that may be read before being assigned (straight-line code, so exact).
std::vector<std::string> read_before_write(const Program& p);
std::vector<std::string> assigned_vars(const Program& p);

std::string to_string(const Stmt& s);
std::string to_string(const Program& p, std::string_view sep = " ");

/// Called when an identifier is followed by '('; parses the remainder of the atom.
using ExternHook = std::function<ExprPtr(const std::string& name, TokenCursor& cur)>;

ExprPtr parse_expr(TokenCursor& cur, const ExternHook* hook = nullptr);
ExprPtr parse_expr(std::string_view text, const ExternHook* hook = nullptr);
Stmt parse_stmt(TokenCursor& cur);
/// Parses statements until the next '}' (not consumed).
Program parse_program_body(TokenCursor& cur);
Program parse_program(std::string_view text);

/// `NAME : bool = LIT;` or `NAME : int[LO..HI] = LIT;` after the `var` keyword.
/// A literal of the wrong type is reported into `diags`, not thrown.
VarDecl parse_var_decl(TokenCursor& cur, Diagnostics& diags);

}  // namespace sfcbip
