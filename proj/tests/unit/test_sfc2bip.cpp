#include <algorithm>
#include <set>

#include "../support/listings.hpp"
#include "doctest.h"
#include "sfcbip/bip_exec.hpp"
#include "sfcbip/fixtures.hpp"
#include "sfcbip/random_model.hpp"
#include "sfcbip/sfc2bip.hpp"
#include "sfcbip/sfc_exec.hpp"
#include "sfcbip/simcheck.hpp"

using namespace sfcbip;

namespace {

SfcModel load(const std::string& name) {
  auto r = parse_sfc(load_fixture(name));
  INFO(format_diagnostics(r.diags));
  REQUIRE(r.ok());
  return std::move(*r.model);
}

SfcModel from_text(const std::string& text, Dialect d = Dialect::non_extended) {
  auto r = parse_sfc(text, d);
  INFO(format_diagnostics(r.diags));
  REQUIRE(r.ok());
  return std::move(*r.model);
}

const AtomicComponent& atomic(const ComposedModel& b, const std::string& name) {
  auto it = std::find_if(b.atomics.begin(), b.atomics.end(), [&](const auto& a) { return a.name == name; });
  REQUIRE(it != b.atomics.end());
  return *it;
}

const Connector& connector(const ComposedModel& b, const std::string& name) {
  auto it = std::find_if(b.connectors.begin(), b.connectors.end(), [&](const auto& c) { return c.name == name; });
  REQUIRE(it != b.connectors.end());
  return *it;
}

bool has_priority(const ComposedModel& b, const std::string& lo, const std::string& hi) {
  return std::find(b.priority.begin(), b.priority.end(), std::pair{lo, hi}) != b.priority.end();
}

std::string decl_of(const SfcModel& m, const std::string& x) {
  const auto& v = m.vars[*m.var_index(x)];
  return format_decl_type(v) + " = " + format_value(v, v.init);
}

void check_listing(const AtomicComponent& got, const std::string& listing) {
  CAPTURE(got.name);
  CHECK(listings::mismatch(got, listings::parse_atomic(listing)) == "");
}

std::size_t count_law(const SfcModel& m) {
  return m.vars.size() + 2 * m.actions.size() + m.steps.size() + m.initial.size() + m.transitions.size() + 1;
}

const char* kExtended = R"(
sfc ext {
  var x : int[0..7] = 0;
  action a1 { x := x + 1; }
  action a2 { x := 0; }
  step S1 init { a1; a2@P1; }
  step S2 { a2@S; }
  transition t1 : S1 -> S2 when x > 2;
  transition t2 : S2 -> S1 when true;
  order a1 < a2;
})";

}  // namespace

TEST_CASE("fig3 with verbatim templates matches every listing") {
  auto m = load("fig3");
  TransformOptions opt;
  opt.literal_templates = true;
  auto r = transform(m, opt);
  const auto& b = r.model;
  REQUIRE(b.atomics.size() == 19);
  for (const auto& x : m.vars) check_listing(atomic(b, gv_name(x.name)), listings::gv(x.name, decl_of(m, x.name)));
  for (const auto& a : m.actions) check_listing(atomic(b, acb_name(a.name)), listings::acb_simple(a.name));
  for (const auto& s : m.steps) check_listing(atomic(b, step_component_name(s.name)), listings::step(s.name));
  for (const auto& s : m.initial) check_listing(atomic(b, starter_name(s)), listings::starter(s));
  for (const auto& t : m.transitions) {
    std::vector<listings::GuardVar> reads;
    for (const auto& x : guard_reads(t, m.vars)) reads.push_back({x, decl_of(m, x)});
    check_listing(atomic(b, guard_name(t.name)), listings::guard(t.name, reads, to_string(*t.guard), false));
  }
  check_listing(atomic(b, manager_name()), listings::manager());
}

TEST_CASE("default templates differ from the listings only where pinned") {
  auto m = load("fig3");
  auto b = transform(m).model;
  const auto& gv = atomic(b, "gv_x");
  CHECK(gv.initial == "WRITE");
  auto gv_lit = gv;
  gv_lit.initial = "READ";
  CHECK(listings::mismatch(gv_lit, listings::parse_atomic(listings::gv("x", "int[0..31] = 0"))) == "");

  const auto& st = atomic(b, "step_S2");
  CHECK(st.initial == "DISABLED");
  CHECK(st.locations == std::vector<std::string>{"DISABLED", "ACTIVE", "ACTION", "ENTERED"});
  CHECK(st.transitions.size() == 7);
  CHECK(st.port_index("start"));
  CHECK(connector(b, "c_start_S1").receivers == std::vector<Endpoint>{{"step_S1", "start"}});

  check_listing(atomic(b, "mgr"), listings::manager());
  check_listing(atomic(b, "starter_S1"), listings::starter("S1"));
  check_listing(atomic(b, "acb_a2"), listings::acb_simple("a2"));
}

TEST_CASE("extended templates") {
  auto m = from_text(kExtended, Dialect::extended_syntax);
  TransformOptions opt;
  opt.mode = TemplateMode::extended;
  auto b = transform(m, opt).model;
  const auto& acb = atomic(b, "acb_a1");
  CHECK(acb.transitions.size() == 8);
  CHECK(acb.ports.size() == 7);
  check_listing(acb, listings::acb_extended("a1"));
  check_listing(atomic(b, "guard_t1"), listings::guard("t1", {{"x", "int[0..7] = 0"}}, "x > 2", true));
  check_listing(atomic(b, "guard_t2"), listings::guard("t2", {}, "true", true));
  CHECK(connector(b, "c_act_S2").receivers == std::vector<Endpoint>{{"acb_a2", "S"}});
  CHECK(connector(b, "c_gact_t2").receivers == std::vector<Endpoint>{{"acb_a2", "N"}});
  CHECK(connector(b, "c_gact_t1").receivers.empty());
  CHECK(validate_bip(b).empty());

  CHECK_THROWS_AS(transform(m), TransformError);
  CHECK_THROWS_AS(transform(load("fig3"), opt), TransformError);
}

TEST_CASE("action component chains") {
  auto m = load("fig3");
  auto a1 = create_action_component(m.actions[0], m.vars);
  CHECK(a1.locations == std::vector<std::string>{"IDLE", "R_x", "W_x", "FIN"});
  CHECK(a1.ports.size() == 4);
  CHECK(action_reads(m.actions[0], m.vars) == std::vector<std::string>{"x"});
  CHECK(action_writes(m.actions[0], m.vars) == std::vector<std::string>{"x"});

  auto a3 = create_action_component(m.actions[2], m.vars);
  CHECK(action_reads(m.actions[2], m.vars).empty());
  CHECK(a3.locations == std::vector<std::string>{"IDLE", "W_x", "FIN"});

  auto two = from_text(R"(
sfc two {
  var x : int[0..3] = 2;
  var y : int[0..3] = 1;
  var z : int[0..7] = 0;
  action sum { z := y + x; }
  action none { }
  step A init { sum; none; }
  order sum < none;
})");
  auto sum = create_action_component(two.actions[0], two.vars);
  CHECK(sum.locations == std::vector<std::string>{"IDLE", "R_x", "R_y", "W_z", "FIN"});
  auto none = create_action_component(two.actions[1], two.vars);
  CHECK(none.locations == std::vector<std::string>{"IDLE", "FIN"});
  CHECK(none.ports.size() == 2);
  CHECK(none.transitions.size() == 2);

  auto b = transform(two).model;
  auto ix = IndexedBip::build(b);
  auto s = bip_quiesce(ix, initial_state(ix));
  REQUIRE(s);
  CHECK(var_value(ix, *s, "gv_z", "v") == 0);
  // the first cycle only activates the actions of the initial step
  auto c1 = bip_manager_cycle(ix, *s);
  REQUIRE(c1);
  CHECK(var_value(ix, *c1, "gv_z", "v") == 0);
  auto c2 = bip_manager_cycle(ix, *c1);
  REQUIRE(c2);
  CHECK(var_value(ix, *c2, "gv_z", "v") == 3);
}

TEST_CASE("guard for a true condition has no read location") {
  auto m = load("fig3");
  auto g5 = create_guard(m.transitions[4], m.vars, TemplateMode::simple);
  CHECK(g5.locations == std::vector<std::string>{"WAIT", "GUARD", "DONE"});
  auto g1 = create_guard(m.transitions[0], m.vars, TemplateMode::simple);
  CHECK(std::count(g1.locations.begin(), g1.locations.end(), "READ_x") == 1);
  CHECK(!g1.port_index("act"));
}

TEST_CASE("fig3 composition") {
  auto m = load("fig3");
  auto r = transform(m);
  const auto& b = r.model;
  CHECK(b.atomics.size() == 19);
  CHECK(b.connectors.size() == 28);
  CHECK(validate_bip(b).empty());

  std::vector<std::string> names;
  for (const auto& a : b.atomics) names.push_back(a.name);
  CHECK(names == std::vector<std::string>{"gv_x", "gv_y", "action_a1", "action_a2", "action_a3", "acb_a1", "acb_a2",
                                          "acb_a3", "step_S1", "step_S2", "step_S3", "step_S4", "starter_S1",
                                          "guard_t1", "guard_t2", "guard_t3", "guard_t4", "guard_t5", "mgr"});

  CHECK(connector(b, "c_act_S3").receivers == std::vector<Endpoint>{{"acb_a3", "N"}});
  CHECK(connector(b, "c_act_S4").receivers == std::vector<Endpoint>{{"acb_a3", "N"}});
  CHECK(connector(b, "c_wtick").receivers.size() == 3 + 2 + 1);
  CHECK(connector(b, "c_ttick").receivers.size() == 3 + 5 + 2);
  CHECK(connector(b, "c_ftick").receivers.size() == 4 + 5);

  // tick < middle < work, work follows the action order, guards follow transition priority
  CHECK(has_priority(b, "c_wtick", "c_done_a1"));
  CHECK(has_priority(b, "c_done_a1", "c_work_a3"));
  CHECK(has_priority(b, "c_work_a2", "c_work_a1"));
  CHECK(has_priority(b, "c_work_a3", "c_work_a2"));
  CHECK(has_priority(b, "c_guard_t1", "c_guard_t2"));
  CHECK(has_priority(b, "c_guard_t1", "c_gread_x_t3"));
  CHECK(!has_priority(b, "c_guard_t2", "c_guard_t1"));

  TransformOptions off;
  off.sfc_priority = false;
  CHECK(!has_priority(transform(m, off).model, "c_guard_t1", "c_guard_t2"));

  CHECK(r.trace.steps.at("S1") == "step_S1");
  CHECK(r.trace.actions.at("a3").acb == "acb_a3");
  CHECK(r.trace.steps_of_action.at("a3") == std::vector<std::string>{"S3", "S4"});
  CHECK(r.trace.transitions.size() == 5);
  CHECK(r.trace.to_json().dump() ==
        R"({"steps":{"S1":"step_S1","S2":"step_S2","S3":"step_S3","S4":"step_S4"},)"
        R"("actions":{"a1":{"component":"action_a1","acb":"acb_a1"},"a2":{"component":"action_a2","acb":"acb_a2"},)"
        R"("a3":{"component":"action_a3","acb":"acb_a3"}},"vars":{"x":"gv_x","y":"gv_y"},)"
        R"("transitions":{"t1":"guard_t1","t2":"guard_t2","t3":"guard_t3","t4":"guard_t4","t5":"guard_t5"},)"
        R"("starters":{"S1":"starter_S1"},"manager":"mgr","steps_of_action":{"a1":["S1"],"a2":["S2"],"a3":["S3","S4"]}})");
}

TEST_CASE("stored fig3 transformation matches") {
  auto b = transform(load("fig3")).model;
  auto stored = parse_bip(load_fixture("fig3_transformed"));
  REQUIRE(stored.ok());
  CHECK(structurally_equal(b, *stored.model));
}

TEST_CASE("pattern connector shapes") {
  auto simple = transform(load("pattern_simple")).model;
  const auto& c = connector(simple, "c_guard_t1");
  CHECK(c.sender == Endpoint{"guard_t1", "guard"});
  CHECK(c.receivers == std::vector<Endpoint>{{"step_S3", "tOut"}, {"step_S4", "tIn"}});

  auto div = transform(load("pattern_parallel_div")).model;
  CHECK(connector(div, "c_guard_t1").receivers ==
        std::vector<Endpoint>{{"step_S1", "tOut"}, {"step_S2", "tIn"}, {"step_S3", "tIn"}});
  CHECK(connector(div, "c_guard_t2").receivers ==
        std::vector<Endpoint>{{"step_S2", "tOut"}, {"step_S3", "tOut"}, {"step_S1", "tIn"}});
  // empty step S1 still gets a unary act connector
  CHECK(connector(div, "c_act_S1").receivers.empty());
}

TEST_CASE("transform rejects invalid input") {
  auto m = load("pattern_simple");
  auto self = m;
  self.transitions[0].tgt = {"S3"};
  CHECK_THROWS_AS(transform(self), TransformError);

  auto clash = from_text(R"(
sfc clash {
  var x : int[0..1] = 0;
  action a { x := 0; }
  step S init { a; }
  step T { }
  transition t : S -> T when true;
  transition u : T -> S when true;
  order a;
})");
  clash.steps[1].name = "S";
  CHECK_THROWS_AS(transform(clash), TransformError);
}

TEST_CASE("component-count law on random models") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto m = random_sfc(seed);
    CAPTURE(seed);
    auto b = transform(m).model;
    CHECK(b.atomics.size() == count_law(m));
    CHECK(validate_bip(b).empty());
  }
}

TEST_CASE("verbatim templates deadlock after start-up") {
  TransformOptions opt;
  opt.literal_templates = true;
  for (const char* name : {"fig3", "pattern_simple"}) {
    auto b = transform(load(name), opt).model;
    auto ix = IndexedBip::build(b);
    auto g = reachable_states(ix);
    CHECK(g.nodes.size() == 2);
    CHECK(g.edges.size() == 1);
    CHECK(g.out[1].empty());
  }
}

TEST_CASE("quiescent BIP states project onto the SFC cycle boundaries") {
  for (const char* name : {"fig3", "pattern_simple", "pattern_divergence", "pattern_convergence",
                           "pattern_parallel_div", "pattern_parallel_conv", "trivial"}) {
    CAPTURE(name);
    auto m = load(name);
    auto r = transform(m);
    auto ix = IndexedBip::build(r.model);
    Relation rel(m, r.model, r.trace);
    auto cg = cycle_graph(IndexedSfc::build(m));
    REQUIRE(cg.complete);

    auto g = reachable_states(ix);
    REQUIRE(g.complete);
    std::size_t mgr = 0;
    while (r.model.atomics[mgr].name != manager_name()) ++mgr;
    std::set<std::size_t> matched;
    std::size_t quiescent = 0;
    for (const auto& s : g.nodes) {
      auto en = enabled_interactions(ix, s);
      bool q = en.size() == 1 && r.model.connectors[en[0].connector].name == "c_wtick" &&
               r.model.atomics[mgr].locations[s.loc[mgr]] == "DONE";
      if (!q) continue;
      ++quiescent;
      bool any = false;
      for (std::size_t i = 0; i < cg.nodes.size(); ++i) {
        if (rel.relates(cg.nodes[i].c, s, Rule3::committed)) {
          matched.insert(i);
          any = true;
        }
      }
      CHECK(any);
    }
    CHECK(quiescent > 0);
    for (std::size_t i = 0; i < cg.nodes.size(); ++i) {
      if (cg.observed[i]) CHECK(matched.count(i) == 1);
    }
  }
}

TEST_CASE("verbatim step template lets steps chain within one cycle") {
  auto m = load("fig3");
  auto r = transform(m);
  auto b = r.model;
  for (auto& a : b.atomics) {
    if (a.name.rfind("step_", 0) == 0) a = listings::parse_atomic(listings::step(a.name.substr(5)));
  }
  for (auto& c : b.connectors) {
    if (c.name == "c_start_S1") c.receivers = {{"step_S1", "tIn"}};
  }
  REQUIRE(validate_bip(b).empty());
  CHECK(macro_cycle_check(m, r.model, r.trace, 25).ok);
  auto mc = macro_cycle_check(m, b, r.trace, 25);
  CHECK_FALSE(mc.ok);
  CHECK(mc.message.find("rule1") != std::string::npos);
}
