#include "doctest.h"
#include "sfcbip/fixtures.hpp"
#include "sfcbip/invariants.hpp"
#include "sfcbip/random_model.hpp"
#include "sfcbip/simcheck.hpp"

using namespace sfcbip;

namespace {

SfcModel load(const std::string& name) {
  auto r = parse_sfc(load_fixture(name));
  INFO(format_diagnostics(r.diags));
  REQUIRE(r.ok());
  return std::move(*r.model);
}

Configuration config(const SfcModel& m, std::vector<Value> f, std::vector<std::string> steps, std::vector<std::string> acts) {
  Configuration c;
  c.f.values = std::move(f);
  c.active_steps.assign(m.steps.size(), false);
  c.active_actions.assign(m.actions.size(), false);
  for (const auto& s : steps) c.active_steps[*m.step_index(s)] = true;
  for (const auto& a : acts) c.active_actions[*m.action_index(a)] = true;
  return c;
}

bool is_connective(const Inv& i) {
  return i.kind == InvKind::neg || i.kind == InvKind::conj || i.kind == InvKind::disj;
}

// `out` is `in` with each atom replaced by some formula.
bool same_skeleton(const Inv& in, const Inv& out) {
  if (!is_connective(in)) return true;
  if (in.kind != out.kind || in.kids.size() != out.kids.size()) return false;
  for (std::size_t k = 0; k < in.kids.size(); ++k) {
    if (!same_skeleton(*in.kids[k], *out.kids[k])) return false;
  }
  return true;
}

CheckVerdict on_boundaries(const SfcModel& m, const Inv& inv) {
  auto g = cycle_graph(IndexedSfc::build(m));
  return check_sfc_invariant(g, [&](const Configuration& c) { return eval_inv(inv, c); }).verdict;
}

CheckVerdict on_bip(const ComposedModel& b, const Inv& inv) {
  auto g = reachable_states(IndexedBip::build(b));
  return check_bip_invariant(g, [&](const BipState& s) { return eval_inv(inv, s); }).verdict;
}

struct Fig3 {
  SfcModel m = load("fig3");
  TransformResult r = transform(m);
};

}  // namespace

TEST_CASE("SFC invariant parsing and evaluation") {
  auto m = load("fig3");
  auto c = config(m, {0, 0}, {"S1"}, {});
  CHECK_FALSE(eval_inv(*parse_sfc_inv("enabled(a1)", m), c));
  CHECK(eval_inv(*parse_sfc_inv("active(S1)", m), c));
  CHECK(eval_inv(*parse_sfc_inv("x < 10", m), config(m, {3, 0}, {}, {})));
  CHECK(eval_inv(*parse_sfc_inv("!(active(S2) || x > 2) && true", m), c));
  CHECK(to_string(*parse_sfc_inv("!(active(S2) || x > 2)", m), InvSide::sfc) == "!(active(S2) || x > 2)");
  CHECK(to_string(*parse_sfc_inv("(x > 1 || y > 1) && active(S1)", m), InvSide::sfc) ==
        "(x > 1 || y > 1) && active(S1)");

  CHECK_THROWS_AS(parse_sfc_inv("active(S9)", m), InvError);
  CHECK_THROWS_AS(parse_sfc_inv("enabled(zz)", m), InvError);
  CHECK_THROWS_AS(parse_sfc_inv("q > 1", m), InvError);
  CHECK_THROWS(parse_sfc_inv("active(S1", m));
  CHECK_THROWS(parse_sfc_inv("x +", m));
}

TEST_CASE("BIP invariant parsing and evaluation") {
  Fig3 f;
  auto ix = IndexedBip::build(f.r.model);
  auto s0 = initial_state(ix);
  CHECK(eval_inv(*parse_bip_inv("at(mgr, DONE)", f.r.model), s0));
  CHECK_FALSE(eval_inv(*parse_bip_inv("at(acb_a1, ENABLE) && acb_a1.e == true", f.r.model), s0));
  CHECK(eval_inv(*parse_bip_inv("at(step_S3, DISABLED) || at(step_S4, DISABLED)", f.r.model), s0));
  CHECK(eval_inv(*parse_bip_inv("gv_x.v == 0 && gv_y.t <= 31", f.r.model), s0));

  CHECK_THROWS_AS(parse_bip_inv("at(mgr, NOWHERE)", f.r.model), InvError);
  CHECK_THROWS_AS(parse_bip_inv("at(nobody, DONE)", f.r.model), InvError);
  CHECK_THROWS_AS(parse_bip_inv("gv_x.q > 0", f.r.model), InvError);
  // accepted here, rejected by T_I
  CHECK(eval_inv(*parse_bip_inv("gv_x.v >= gv_y.v", f.r.model), s0));
  CHECK_THROWS_AS(t_i(*parse_bip_inv("gv_x.v > gv_y.v", f.r.model), f.r.trace, f.m, f.r.model), InvError);
}

TEST_CASE("structural invariant shape") {
  auto m = load("fig3");
  auto s = structural_invariant(m);
  CHECK(to_string(*s, InvSide::sfc) ==
        "((active(S1) && enabled(a1)) || (!active(S1) && !enabled(a1))) && "
        "((active(S2) && enabled(a2)) || (!active(S2) && !enabled(a2))) && "
        "(((active(S3) || active(S4)) && enabled(a3)) || (!active(S3) && !active(S4) && !enabled(a3)))");

  auto orphan = parse_sfc(R"(
sfc o {
  var x : int[0..1] = 0;
  action a { x := 0; }
  step S init { }
  order a;
})");
  REQUIRE(orphan.ok());
  CHECK(to_string(*structural_invariant(*orphan.model), InvSide::sfc) == "!enabled(a)");

  auto none = load("trivial");
  if (none.actions.empty()) CHECK(to_string(*structural_invariant(none), InvSide::sfc) == "true");
}

TEST_CASE("structural invariant holds at cycle boundaries only") {
  for (const auto& fx : list_fixtures()) {
    if (fx.kind != FixtureKind::sfc) continue;
    auto m = load(fx.name);
    CAPTURE(fx.name);
    CHECK(on_boundaries(m, *structural_invariant(m)) == CheckVerdict::holds);
  }
  auto m = load("fig3");
  ExecOptions lit;
  lit.mode = ExecMode::literal;
  auto g = reachable_configs(IndexedSfc::build(m), lit);
  auto inv = structural_invariant(m);
  auto r = check_sfc_invariant(g, [&](const Configuration& c) { return eval_inv(*inv, c); });
  CHECK(r.verdict == CheckVerdict::violated);
  CHECK(r.path.size() == 1);  // c0: S1 active, a1 not yet activated
}

TEST_CASE("T_I on the ACB example") {
  Fig3 f;
  auto bip = parse_bip_inv("!at(acb_a2, ENABLE) || at(acb_a2, ENABLE) && acb_a2.e", f.r.model);
  auto sfc = t_i(*bip, f.r.trace, f.m, f.r.model);
  CHECK(to_string(*sfc, InvSide::sfc) == "!active(S2) || (active(S2) && enabled(a2))");
  CHECK(same_skeleton(*bip, *sfc));

  auto a3 = t_i(*parse_bip_inv("at(acb_a3, ENABLE)", f.r.model), f.r.trace, f.m, f.r.model);
  CHECK(to_string(*a3, InvSide::sfc) == "active(S3) || active(S4)");

  auto g2 = check_g2_instance(f.m, f.r.model, f.r.trace, *bip);
  CHECK(g2.bip == CheckVerdict::holds);
  CHECK(g2.sfc == CheckVerdict::holds);
}

TEST_CASE("T_I on the step interaction invariant") {
  auto m = load("pattern_simple");
  auto r = transform(m);
  auto bip = parse_bip_inv("at(step_S3, DISABLED) || at(step_S4, DISABLED)", r.model);
  auto sfc = t_i(*bip, r.trace, m, r.model);
  CHECK(to_string(*sfc, InvSide::sfc) == "!active(S3) || !active(S4)");
  auto g2 = check_g2_instance(m, r.model, r.trace, *bip);
  CHECK(g2.holds());
}

TEST_CASE("T_I atom rules") {
  Fig3 f;
  auto ti = [&](const std::string& text) {
    return to_string(*t_i(*parse_bip_inv(text, f.r.model), f.r.trace, f.m, f.r.model), InvSide::sfc);
  };
  CHECK(ti("gv_x.v < 10") == "x < 10");
  CHECK(ti("gv_x.t < 10") == "true");
  CHECK(ti("at(step_S2, ACTION)") == "active(S2)");
  CHECK(ti("at(step_S2, DISABLED)") == "!active(S2)");
  CHECK(ti("at(acb_a1, WORK)") == "false");
  CHECK(ti("at(mgr, DONE)") == "false");
  CHECK(ti("at(gv_x, READ)") == "false");
  CHECK(ti("guard_t1.x > 3") == "true");
  CHECK(ti("acb_a1.e") == "enabled(a1)");
  CHECK(ti("!acb_a1.e") == "!enabled(a1)");
  CHECK(ti("acb_a1.e || !acb_a1.e") == "enabled(a1) || !enabled(a1)");
  CHECK(ti("gv_x.v <= 17 && at(step_S1, ACTIVE)") == "x <= 17 && active(S1)");
  CHECK_THROWS_AS(ti("gv_x.v > gv_x.t"), InvError);
}

TEST_CASE("T_R atom rules") {
  Fig3 f;
  auto tr = [&](const std::string& text) {
    return to_string(*t_r(*parse_sfc_inv(text, f.m), f.r.trace, f.m, f.r.model), InvSide::bip);
  };
  CHECK(tr("active(S1)") == "!at(step_S1, DISABLED)");
  CHECK(tr("enabled(a1)") == "acb_a1.e == true");
  CHECK(tr("x > 20") == "gv_x.v > 20");
  CHECK(tr("enabled(a1) && x > 20") == "acb_a1.e == true && gv_x.v > 20");
  auto in = parse_sfc_inv("!(active(S2) || x + y > 3) && enabled(a3)", f.m);
  CHECK(same_skeleton(*in, *t_r(*in, f.r.trace, f.m, f.r.model)));
  CHECK_FALSE(same_skeleton(*in, *parse_sfc_inv("active(S2) && enabled(a3)", f.m)));
}

TEST_CASE("T_R certifies the verified bound on x") {
  Fig3 f;
  // tests/oracles/sfc_oracle.py --mode=cycle fixtures/fig3.sfc: max x = 17
  CHECK(on_boundaries(f.m, *parse_sfc_inv("x <= 17", f.m)) == CheckVerdict::holds);
  CHECK(on_boundaries(f.m, *parse_sfc_inv("x <= 16", f.m)) == CheckVerdict::violated);
  auto req = t_r(*parse_sfc_inv("x <= 17", f.m), f.r.trace, f.m, f.r.model);
  CHECK(on_bip(f.r.model, *req) == CheckVerdict::holds);
  CHECK(on_bip(f.r.model, *t_r(*parse_sfc_inv("x <= 16", f.m), f.r.trace, f.m, f.r.model)) == CheckVerdict::violated);
}

TEST_CASE("round trip and normal form") {
  auto m = load("fig3");
  for (const char* text : {"active(S1) && !enabled(a2)", "!(x > 3 && y < 2) || active(S4)",
                           "(active(S1) || active(S2)) && (enabled(a1) || x == 0)"}) {
    auto a = parse_sfc_inv(text, m);
    auto b = parse_sfc_inv(to_string(*a, InvSide::sfc), m);
    CHECK(structurally_equal(*a, *b));
  }
  auto n = normalize_nnf(parse_sfc_inv("!(active(S1) && !(x > 3 || enabled(a1)))", m));
  CHECK(to_string(*n, InvSide::sfc) == "!active(S1) || (x > 3 || enabled(a1))");
  auto c = config(m, {4, 0}, {"S1"}, {"a1"});
  CHECK(eval_inv(*n, c) == eval_inv(*parse_sfc_inv("!(active(S1) && !(x > 3 || enabled(a1)))", m), c));
}

TEST_CASE("G2 over fixtures and random models") {
  for (const auto& fx : list_fixtures()) {
    if (fx.kind != FixtureKind::sfc || fx.name == "raw") continue;
    CAPTURE(fx.name);
    auto m = load(fx.name);
    auto r = transform(m);
    for (const auto& s : m.steps) {
      auto bip = parse_bip_inv("at(step_" + s.name + ", DISABLED) || !at(step_" + s.name + ", DISABLED)", r.model);
      CHECK(check_g2_instance(m, r.model, r.trace, *bip).holds());
    }
    for (const auto& a : m.actions) {
      auto bip = parse_bip_inv("!at(acb_" + a.name + ", ENABLE) || at(acb_" + a.name + ", ENABLE) && acb_" + a.name +
                                   ".e",
                               r.model);
      CHECK(check_g2_instance(m, r.model, r.trace, *bip).holds());
    }
  }
}
