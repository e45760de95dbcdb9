#include <random>

#include "doctest.h"
#include "sfcbip/expr.hpp"

using namespace sfcbip;

namespace {

std::vector<VarDecl> xy() { return {VarDecl::integer("x", 0, 31, 0), VarDecl::integer("y", 0, 31, 5)}; }

Value eval_with(std::string_view text, std::vector<Value> vals) {
  auto decls = xy();
  Diagnostics d;
  auto e = resolve_expr(parse_expr(text), scope_of(decls), d);
  REQUIRE(d.empty());
  return eval_expr(*e, vals);
}

}  // namespace

TEST_CASE("typecheck accepts well-typed assignment and guard") {
  auto decls = xy();
  CHECK(typecheck(parse_program("x := x + 1;"), decls).empty());
  auto g = parse_expr("x < 10");
  CHECK(typecheck(g, decls).empty());
  Diagnostics d;
  CHECK(type_of(*g, scope_of(decls), d) == Type::Bool);
}

TEST_CASE("typecheck reports mismatch and undeclared names") {
  auto decls = xy();
  auto d = typecheck(parse_program("x := true;"), decls);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "type-mismatch");
  auto u = typecheck(parse_expr("z > 1"), decls);
  REQUIRE(u.size() == 1);
  CHECK(u[0].code == "undeclared");
  CHECK(u[0].message.find("z") != std::string::npos);
  CHECK_FALSE(typecheck(parse_expr("x && true"), decls).empty());
  CHECK_FALSE(typecheck(parse_expr("!x"), decls).empty());
}

TEST_CASE("eval") {
  CHECK(eval_with("x < 10", {3, 0}) == 1);
  CHECK(eval_with("x > 10", {3, 0}) == 0);
  CHECK(eval_with("x + 2", {14, 0}) == 16);
  CHECK(eval_with("-x * 3 + y", {2, 7}) == 1);
  CHECK(eval_with("x - y - 1", {10, 3}) == 6);
  CHECK(eval_with("!(x == 1) || y != 2 && false", {1, 2}) == 0);
}

TEST_CASE("exec_program frame, identity and range") {
  auto decls = xy();
  Diagnostics d;
  auto p = resolve_program(parse_program("x := x + 1;"), decls, d);
  auto r = exec_program(p, Valuation{{0, 5}});
  REQUIRE(std::holds_alternative<Valuation>(r));
  CHECK(std::get<Valuation>(r).values == std::vector<Value>{1, 5});

  auto id = exec_program({}, Valuation{{4, 9}});
  CHECK(std::get<Valuation>(id).values == std::vector<Value>{4, 9});

  auto p2 = resolve_program(parse_program("x := x + 1; x := x + 1;"), decls, d);
  auto bad = exec_program(p2, Valuation{{30, 0}});
  REQUIRE(std::holds_alternative<RangeViolation>(bad));
  CHECK(std::get<RangeViolation>(bad).value == 32);
  CHECK(std::get<RangeViolation>(bad).variable == "x");

  // only assigned values are checked, intermediates are exact
  auto p3 = resolve_program(parse_program("x := x + 40 - 40;"), decls, d);
  CHECK(std::holds_alternative<Valuation>(exec_program(p3, Valuation{{31, 0}})));
  CHECK(d.empty());
}

TEST_CASE("printing round-trips through the parser") {
  for (const char* s : {"x + 1 < y * 2", "!(x == 1) || y != 2 && false", "x - (y - 1)", "-(x + 1)", "(x + 1) * 3"}) {
    auto e = parse_expr(s);
    auto again = parse_expr(to_string(*e));
    CHECK_MESSAGE(structurally_equal(*e, *again), s);
  }
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse_expr("x + ");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.pos().line == 1);
  }
  CHECK_THROWS_AS(parse_expr("f(x)"), SyntaxError);
}

TEST_CASE("read and write sets") {
  auto p = parse_program("y := x; x := y + 1; y := 0;");
  CHECK(read_before_write(p) == std::vector<std::string>{"x"});
  CHECK(assigned_vars(p) == std::vector<std::string>{"y", "x"});
}

TEST_CASE("property: frame and composition on random programs") {
  std::mt19937 rng(20241019);
  auto decls = std::vector<VarDecl>{VarDecl::integer("a", -50, 50, 0), VarDecl::integer("b", -50, 50, 0),
                                    VarDecl::integer("c", -50, 50, 0)};
  const char* names[] = {"a", "b", "c"};
  auto rnd_expr = [&]() {
    std::string s = names[rng() % 3];
    s += (rng() % 2) ? " + " : " - ";
    s += std::to_string(rng() % 4);
    return s;
  };
  for (int iter = 0; iter < 300; ++iter) {
    std::string p1s, p2s;
    for (unsigned k = 0; k < 1 + rng() % 3; ++k) p1s += std::string(names[rng() % 3]) + " := " + rnd_expr() + ";";
    for (unsigned k = 0; k < 1 + rng() % 3; ++k) p2s += std::string(names[rng() % 3]) + " := " + rnd_expr() + ";";
    Diagnostics d;
    auto p1 = resolve_program(parse_program(p1s), decls, d);
    auto p2 = resolve_program(parse_program(p2s), decls, d);
    auto both = resolve_program(parse_program(p1s + p2s), decls, d);
    REQUIRE(d.empty());
    Valuation f{{Value(rng() % 21) - 10, Value(rng() % 21) - 10, Value(rng() % 21) - 10}};
    auto r1 = exec_program(p1, f);
    REQUIRE(std::holds_alternative<Valuation>(r1));
    auto assigned = assigned_vars(parse_program(p1s));
    for (std::size_t i = 0; i < 3; ++i) {
      if (std::find(assigned.begin(), assigned.end(), names[i]) == assigned.end()) {
        CHECK(std::get<Valuation>(r1).values[i] == f.values[i]);
      }
    }
    auto r12 = exec_program(p2, std::get<Valuation>(r1));
    auto rb = exec_program(both, f);
    REQUIRE(std::holds_alternative<Valuation>(r12));
    REQUIRE(std::holds_alternative<Valuation>(rb));
    CHECK(std::get<Valuation>(r12) == std::get<Valuation>(rb));
  }
}
