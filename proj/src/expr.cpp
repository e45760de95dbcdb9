#include "sfcbip/expr.hpp"

#include <cassert>
#include <map>
#include <sstream>

namespace sfcbip {

const char* type_name(Type t) { return t == Type::Int ? "int" : "bool"; }

std::string format_value(const VarDecl& d, Value v) {
  if (d.type == Type::Bool) return v ? "true" : "false";
  return std::to_string(v);
}

std::string format_decl_type(const VarDecl& d) {
  if (d.type == Type::Bool) return "bool";
  return "int[" + std::to_string(d.lo) + ".." + std::to_string(d.hi) + "]";
}

Valuation Valuation::initial(std::span<const VarDecl> decls) {
  Valuation f;
  f.values.reserve(decls.size());
  for (const auto& d : decls) f.values.push_back(d.init);
  return f;
}

ExprPtr make_int(Value v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::IntLit;
  e->value = v;
  return e;
}

ExprPtr make_bool(bool b) {
  auto e = std::make_shared<Expr>();
  e->op = Op::BoolLit;
  e->value = b ? 1 : 0;
  return e;
}

ExprPtr make_var(std::string name, int slot) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Var;
  e->name = std::move(name);
  e->slot = slot;
  return e;
}

ExprPtr make_unary(Op op, ExprPtr x) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(x);
  return e;
}

ExprPtr make_binary(Op op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

ExprPtr make_extern(Value id, std::string text) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Extern;
  e->value = id;
  e->name = std::move(text);
  return e;
}

bool is_binary(Op op) { return op >= Op::Add && op <= Op::Or; }
bool is_comparison(Op op) { return op >= Op::Lt && op <= Op::Ne; }

Scope scope_of(std::span<const VarDecl> decls) {
  std::map<std::string, ScopeEntry, std::less<>> table;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    table.emplace(decls[i].name, ScopeEntry{static_cast<int>(i), decls[i].type});
  }
  return [table = std::move(table)](const std::string& name) -> std::optional<ScopeEntry> {
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
  };
}

namespace {

Diagnostic type_error(const Expr& node, const std::string& msg) {
  return {"type-mismatch", msg + " in '" + to_string(node) + "'", node.pos};
}

}  // namespace

std::optional<Type> type_of(const Expr& e, const Scope& scope, Diagnostics& diags) {
  switch (e.op) {
    case Op::IntLit: return Type::Int;
    case Op::BoolLit: return Type::Bool;
    case Op::Extern: return Type::Bool;
    case Op::Var: {
      auto entry = scope(e.name);
      if (!entry) {
        diags.push_back({"undeclared", "undeclared variable '" + e.name + "'", e.pos});
        return std::nullopt;
      }
      return entry->type;
    }
    case Op::Neg:
    case Op::Not: {
      auto t = type_of(*e.lhs, scope, diags);
      if (!t) return std::nullopt;
      Type want = e.op == Op::Neg ? Type::Int : Type::Bool;
      if (*t != want) {
        diags.push_back(type_error(e, std::string("operand must be ") + type_name(want)));
        return std::nullopt;
      }
      return want;
    }
    default: break;
  }
  auto lt = type_of(*e.lhs, scope, diags);
  auto rt = type_of(*e.rhs, scope, diags);
  if (!lt || !rt) return std::nullopt;
  switch (e.op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      if (*lt != Type::Int || *rt != Type::Int) {
        diags.push_back(type_error(e, "arithmetic needs int operands"));
        return std::nullopt;
      }
      return Type::Int;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
      if (*lt != Type::Int || *rt != Type::Int) {
        diags.push_back(type_error(e, "ordering comparison needs int operands"));
        return std::nullopt;
      }
      return Type::Bool;
    case Op::Eq:
    case Op::Ne:
      if (*lt != *rt) {
        diags.push_back(type_error(e, "comparison of int with bool"));
        return std::nullopt;
      }
      return Type::Bool;
    case Op::And:
    case Op::Or:
      if (*lt != Type::Bool || *rt != Type::Bool) {
        diags.push_back(type_error(e, "logical operator needs bool operands"));
        return std::nullopt;
      }
      return Type::Bool;
    default: break;
  }
  return std::nullopt;
}

namespace {

ExprPtr bind(const ExprPtr& e, const Scope& scope) {
  if (e->op == Op::Var) {
    auto entry = scope(e->name);
    auto out = std::make_shared<Expr>(*e);
    out->slot = entry ? entry->slot : -1;
    return out;
  }
  if (!e->lhs) return e;
  auto out = std::make_shared<Expr>(*e);
  out->lhs = bind(e->lhs, scope);
  if (e->rhs) out->rhs = bind(e->rhs, scope);
  return out;
}

}  // namespace

ExprPtr resolve_expr(const ExprPtr& e, const Scope& scope, Diagnostics& diags, std::optional<Type> expected) {
  std::size_t before = diags.size();
  auto t = type_of(*e, scope, diags);
  if (!t || diags.size() != before) return nullptr;
  if (expected && *t != *expected) {
    diags.push_back(type_error(*e, std::string("expected ") + type_name(*expected) + " expression"));
    return nullptr;
  }
  return bind(e, scope);
}

Value eval_expr(const Expr& e, std::span<const Value> slots) {
  switch (e.op) {
    case Op::IntLit:
    case Op::BoolLit: return e.value;
    case Op::Var:
      assert(e.slot >= 0 && static_cast<std::size_t>(e.slot) < slots.size());
      return slots[static_cast<std::size_t>(e.slot)];
    case Op::Neg: return -eval_expr(*e.lhs, slots);
    case Op::Not: return eval_expr(*e.lhs, slots) ? 0 : 1;
    case Op::And: return (eval_expr(*e.lhs, slots) && eval_expr(*e.rhs, slots)) ? 1 : 0;
    case Op::Or: return (eval_expr(*e.lhs, slots) || eval_expr(*e.rhs, slots)) ? 1 : 0;
    case Op::Extern: assert(false && "extern atoms are evaluated by their owner"); return 0;
    default: break;
  }
  Value l = eval_expr(*e.lhs, slots);
  Value r = eval_expr(*e.rhs, slots);
  switch (e.op) {
    case Op::Add: return l + r;
    case Op::Sub: return l - r;
    case Op::Mul: return l * r;
    case Op::Lt: return l < r;
    case Op::Le: return l <= r;
    case Op::Gt: return l > r;
    case Op::Ge: return l >= r;
    case Op::Eq: return l == r;
    case Op::Ne: return l != r;
    default: break;
  }
  return 0;
}

ExprPtr map_vars(const ExprPtr& e, const std::function<ExprPtr(const Expr&)>& fn) {
  if (e->op == Op::Var) {
    auto r = fn(*e);
    return r ? r : e;
  }
  if (!e->lhs) return e;
  auto out = std::make_shared<Expr>(*e);
  out->lhs = map_vars(e->lhs, fn);
  if (e->rhs) out->rhs = map_vars(e->rhs, fn);
  return out;
}

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.op == Op::Var) out.insert(e.name);
  if (e.lhs) collect_vars(*e.lhs, out);
  if (e.rhs) collect_vars(*e.rhs, out);
}

bool contains_extern(const Expr& e) {
  if (e.op == Op::Extern) return true;
  return (e.lhs && contains_extern(*e.lhs)) || (e.rhs && contains_extern(*e.rhs));
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::IntLit:
    case Op::BoolLit: return a.value == b.value;
    case Op::Var: return a.name == b.name;
    case Op::Extern: return a.value == b.value && a.name == b.name;
    default: break;
  }
  if (!structurally_equal(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !structurally_equal(*a.rhs, *b.rhs)) return false;
  return true;
}

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Eq:
    case Op::Ne: return 3;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: return 4;
    case Op::Add:
    case Op::Sub: return 5;
    case Op::Mul: return 6;
    case Op::Neg:
    case Op::Not: return 7;
    default: return 8;
  }
}

const char* op_text(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Neg: return "-";
    case Op::Not: return "!";
    default: return "?";
  }
}

void print(const Expr& e, std::ostream& os) {
  switch (e.op) {
    case Op::IntLit: os << e.value; return;
    case Op::BoolLit: os << (e.value ? "true" : "false"); return;
    case Op::Var: os << e.name; return;
    case Op::Extern: os << e.name; return;
    case Op::Neg:
    case Op::Not: {
      os << op_text(e.op);
      bool paren = precedence(e.lhs->op) < precedence(e.op) ||
                   (e.op == Op::Neg && e.lhs->op == Op::IntLit && e.lhs->value < 0);
      if (paren) os << '(';
      print(*e.lhs, os);
      if (paren) os << ')';
      return;
    }
    default: break;
  }
  int p = precedence(e.op);
  // Left-associative: parenthesize a right operand of equal precedence.
  bool lp = precedence(e.lhs->op) < p;
  bool rp = precedence(e.rhs->op) <= p;
  if (is_comparison(e.op)) {
    lp = precedence(e.lhs->op) <= p;
  }
  if (lp) os << '(';
  print(*e.lhs, os);
  if (lp) os << ')';
  os << ' ' << op_text(e.op) << ' ';
  if (rp) os << '(';
  print(*e.rhs, os);
  if (rp) os << ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(e, os);
  return os.str();
}

std::string RangeViolation::str() const {
  return "range violation: " + variable + " := " + std::to_string(value) + " outside [" + std::to_string(lo) +
         ".." + std::to_string(hi) + "]";
}

Program resolve_program(const Program& p, std::span<const VarDecl> decls, Diagnostics& diags) {
  Scope scope = scope_of(decls);
  Program out;
  out.reserve(p.size());
  for (const auto& s : p) {
    auto entry = scope(s.target);
    if (!entry) {
      diags.push_back({"undeclared", "assignment to undeclared variable '" + s.target + "'", s.pos});
      continue;
    }
    auto bound = resolve_expr(s.value, scope, diags, entry->type);
    if (!bound) continue;
    Stmt r = s;
    r.value = bound;
    r.slot = entry->slot;
    r.lo = decls[static_cast<std::size_t>(entry->slot)].lo;
    r.hi = decls[static_cast<std::size_t>(entry->slot)].hi;
    out.push_back(std::move(r));
  }
  return out;
}

Diagnostics typecheck(const ExprPtr& e, std::span<const VarDecl> decls) {
  Diagnostics diags;
  Scope scope = scope_of(decls);
  type_of(*e, scope, diags);
  return diags;
}

Diagnostics typecheck(const Program& p, std::span<const VarDecl> decls) {
  Diagnostics diags;
  resolve_program(p, decls, diags);
  return diags;
}

std::optional<RangeViolation> exec_in_place(const Program& p, std::span<Value> slots) {
  for (const auto& s : p) {
    Value v = eval_expr(*s.value, slots);
    if (v < s.lo || v > s.hi) return RangeViolation{s.target, v, s.lo, s.hi};
    slots[static_cast<std::size_t>(s.slot)] = v;
  }
  return std::nullopt;
}

std::variant<Valuation, RangeViolation> exec_program(const Program& p, const Valuation& f) {
  Valuation out = f;
  if (auto err = exec_in_place(p, out.values)) return *err;
  return out;
}

std::vector<std::string> read_before_write(const Program& p) {
  std::set<std::string> written;
  std::vector<std::string> reads;
  std::set<std::string> seen;
  for (const auto& s : p) {
    std::set<std::string> used;
    collect_vars(*s.value, used);
    for (const auto& v : used) {
      if (!written.count(v) && seen.insert(v).second) reads.push_back(v);
    }
    written.insert(s.target);
  }
  return reads;
}

std::vector<std::string> assigned_vars(const Program& p) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : p) {
    if (seen.insert(s.target).second) out.push_back(s.target);
  }
  return out;
}

std::string to_string(const Stmt& s) { return s.target + " := " + to_string(*s.value) + ";"; }

std::string to_string(const Program& p, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += sep;
    out += to_string(p[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing: precedence climbing over the shared token stream.

namespace {

std::optional<Op> binary_op(Tok t) {
  switch (t) {
    case Tok::OrOr: return Op::Or;
    case Tok::AndAnd: return Op::And;
    case Tok::EqEq: return Op::Eq;
    case Tok::Ne: return Op::Ne;
    case Tok::Lt: return Op::Lt;
    case Tok::Le: return Op::Le;
    case Tok::Gt: return Op::Gt;
    case Tok::Ge: return Op::Ge;
    case Tok::Plus: return Op::Add;
    case Tok::Minus: return Op::Sub;
    case Tok::Star: return Op::Mul;
    default: return std::nullopt;
  }
}

ExprPtr with_pos(ExprPtr e, SourcePos pos) {
  auto m = std::const_pointer_cast<Expr>(e);
  m->pos = pos;
  return m;
}

ExprPtr parse_binary(TokenCursor& cur, int min_prec, const ExternHook* hook);

ExprPtr parse_primary(TokenCursor& cur, const ExternHook* hook) {
  const Token& t = cur.peek();
  SourcePos pos = t.pos;
  if (t.kind == Tok::Minus) {
    cur.next();
    auto operand = parse_primary(cur, hook);
    if (operand->op == Op::IntLit) return with_pos(make_int(-operand->value), pos);
    return with_pos(make_unary(Op::Neg, operand), pos);
  }
  if (t.kind == Tok::Bang) {
    cur.next();
    return with_pos(make_unary(Op::Not, parse_primary(cur, hook)), pos);
  }
  if (t.kind == Tok::LParen) {
    cur.next();
    auto e = parse_binary(cur, 1, hook);
    cur.expect(Tok::RParen, "to close parenthesis");
    return e;
  }
  if (t.kind == Tok::Int) {
    Value v = std::stoll(cur.next().text);
    return with_pos(make_int(v), pos);
  }
  if (t.kind == Tok::Ident) {
    std::string name = cur.next().text;
    if (name == "true") return with_pos(make_bool(true), pos);
    if (name == "false") return with_pos(make_bool(false), pos);
    if (cur.at(Tok::LParen)) {
      if (!hook) throw SyntaxError("function calls are not part of the expression language ('" + name + "')", pos);
      return with_pos((*hook)(name, cur), pos);
    }
    while (cur.at(Tok::Dot)) {
      cur.next();
      name += "." + cur.expect_ident("after '.'");
    }
    return with_pos(make_var(name), pos);
  }
  cur.fail(std::string("expected expression, found ") +
           (t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'"));
}

int binary_prec(Op op) { return precedence(op); }

ExprPtr parse_binary(TokenCursor& cur, int min_prec, const ExternHook* hook) {
  auto lhs = parse_primary(cur, hook);
  while (true) {
    auto op = binary_op(cur.peek().kind);
    if (!op) break;
    int p = binary_prec(*op);
    if (p < min_prec) break;
    SourcePos pos = cur.next().pos;
    auto rhs = parse_binary(cur, p + 1, hook);
    lhs = with_pos(make_binary(*op, lhs, rhs), pos);
  }
  return lhs;
}

}  // namespace

ExprPtr parse_expr(TokenCursor& cur, const ExternHook* hook) { return parse_binary(cur, 1, hook); }

ExprPtr parse_expr(std::string_view text, const ExternHook* hook) {
  TokenCursor cur(tokenize(text));
  auto e = parse_expr(cur, hook);
  if (!cur.at(Tok::End)) cur.fail("unexpected '" + cur.peek().text + "' after expression");
  return e;
}

Stmt parse_stmt(TokenCursor& cur) {
  Stmt s;
  s.pos = cur.peek().pos;
  s.target = cur.expect_ident("as assignment target");
  cur.expect(Tok::Assign, "in assignment");
  s.value = parse_expr(cur);
  cur.expect(Tok::Semi, "after assignment");
  return s;
}

Program parse_program_body(TokenCursor& cur) {
  Program p;
  while (!cur.at(Tok::RBrace) && !cur.at(Tok::End)) p.push_back(parse_stmt(cur));
  return p;
}

Program parse_program(std::string_view text) {
  TokenCursor cur(tokenize(text));
  Program p = parse_program_body(cur);
  if (!cur.at(Tok::End)) cur.fail("unexpected '" + cur.peek().text + "'");
  return p;
}

namespace {

Value parse_literal(TokenCursor& cur, Type& type_out) {
  if (cur.accept_keyword("true")) {
    type_out = Type::Bool;
    return 1;
  }
  if (cur.accept_keyword("false")) {
    type_out = Type::Bool;
    return 0;
  }
  bool neg = cur.accept(Tok::Minus);
  Value v = std::stoll(cur.expect(Tok::Int, "as literal").text);
  type_out = Type::Int;
  return neg ? -v : v;
}

}  // namespace

VarDecl parse_var_decl(TokenCursor& cur, Diagnostics& diags) {
  VarDecl d;
  d.name = cur.expect_ident("as variable name");
  cur.expect(Tok::Colon, "after variable name");
  if (cur.accept_keyword("bool")) {
    d.type = Type::Bool;
    d.lo = 0;
    d.hi = 1;
  } else if (cur.accept_keyword("int")) {
    d.type = Type::Int;
    Type t;
    cur.expect(Tok::LBracket, "to open integer range");
    d.lo = parse_literal(cur, t);
    cur.expect(Tok::DotDot, "in integer range");
    d.hi = parse_literal(cur, t);
    cur.expect(Tok::RBracket, "to close integer range");
  } else {
    cur.fail("expected 'bool' or 'int' type");
  }
  cur.expect(Tok::Eq1, "before initial value");
  SourcePos pos = cur.peek().pos;
  Type t;
  d.init = parse_literal(cur, t);
  if (t != d.type) diags.push_back({"type-mismatch", "initial value of '" + d.name + "' must be " + type_name(d.type), pos});
  cur.expect(Tok::Semi, "after variable declaration");
  return d;
}

}  // namespace sfcbip
