#include "sfcbip/sfc2bip.hpp"

#include <algorithm>
#include <set>

namespace sfcbip {

std::string gv_name(const std::string& x) { return "gv_" + x; }
std::string action_component_name(const std::string& a) { return "action_" + a; }
std::string acb_name(const std::string& a) { return "acb_" + a; }
std::string step_component_name(const std::string& s) { return "step_" + s; }
std::string starter_name(const std::string& s) { return "starter_" + s; }
std::string guard_name(const std::string& t) { return "guard_" + t; }

namespace {

ExprPtr expr(const char* text) { return parse_expr(text); }

void loc(AtomicComponent& a, std::initializer_list<const char*> names) {
  for (const char* n : names) a.locations.emplace_back(n);
}

void port(AtomicComponent& a, std::string name, std::optional<std::string> binds = std::nullopt) {
  a.ports.push_back({std::move(name), std::move(binds), {}});
}

void on(AtomicComponent& a, std::string src, std::string p, std::string tgt, ExprPtr guard = nullptr,
        Program update = {}) {
  BipTransition t;
  t.src = std::move(src);
  t.port = std::move(p);
  t.tgt = std::move(tgt);
  t.guard = std::move(guard);
  t.update = std::move(update);
  a.transitions.push_back(std::move(t));
}

std::vector<std::string> in_decl_order(const std::set<std::string>& names, const std::vector<VarDecl>& vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) {
    if (names.count(v.name)) out.push_back(v.name);
  }
  return out;
}

const VarDecl& decl_of(const std::vector<VarDecl>& vars, const std::string& n) {
  for (const auto& v : vars) {
    if (v.name == n) return v;
  }
  throw TransformError("undeclared variable '" + n + "'");
}

}  // namespace

std::vector<std::string> guard_reads(const SfcTransition& t, const std::vector<VarDecl>& vars) {
  std::set<std::string> used;
  collect_vars(*t.guard, used);
  return in_decl_order(used, vars);
}

std::vector<std::string> action_reads(const ActionDef& a, const std::vector<VarDecl>& vars) {
  auto r = read_before_write(a.body);
  return in_decl_order({r.begin(), r.end()}, vars);
}

std::vector<std::string> action_writes(const ActionDef& a, const std::vector<VarDecl>& vars) {
  auto w = assigned_vars(a.body);
  return in_decl_order({w.begin(), w.end()}, vars);
}

AtomicComponent create_acb(const std::string& action, TemplateMode mode) {
  AtomicComponent a;
  a.name = acb_name(action);
  if (mode == TemplateMode::extended) {
    loc(a, {"ACTIVE", "WORK", "WORKED", "WAIT"});
    for (const char* p : {"wTick", "tTick", "N", "S", "R", "work", "done"}) port(a, p);
    for (const char* v : {"n", "s", "r", "e"}) a.vars.push_back(VarDecl::boolean(v));
    on(a, "ACTIVE", "tTick", "WAIT");
    on(a, "WAIT", "wTick", "ACTIVE", nullptr,
       parse_program("e := !r && (s || n); s := !r && s; r := false; n := false;"));
    on(a, "ACTIVE", "work", "WORK", expr("e"));
    on(a, "WORK", "done", "WORKED");
    on(a, "WORKED", "tTick", "WAIT");
    on(a, "WAIT", "N", "WAIT", nullptr, parse_program("n := true;"));
    on(a, "WAIT", "R", "WAIT", nullptr, parse_program("r := true;"));
    on(a, "WAIT", "S", "WAIT", nullptr, parse_program("s := true;"));
  } else {
    loc(a, {"WAIT", "ENABLE", "ACTIVE", "WORK", "WORKED"});
    for (const char* p : {"wTick", "tTick", "N", "work", "done"}) port(a, p);
    a.vars.push_back(VarDecl::boolean("e"));
    on(a, "WAIT", "N", "ENABLE", nullptr, parse_program("e := true;"));
    on(a, "ENABLE", "N", "ENABLE");
    on(a, "WAIT", "wTick", "ACTIVE");
    on(a, "ENABLE", "wTick", "ACTIVE");
    on(a, "ACTIVE", "work", "WORK", expr("e"));
    on(a, "WORK", "done", "WORKED", nullptr, parse_program("e := false;"));
    on(a, "WORKED", "tTick", "WAIT");
    on(a, "ACTIVE", "tTick", "WAIT");
  }
  a.initial = "WAIT";
  return a;
}

AtomicComponent create_action_component(const ActionDef& act, const std::vector<VarDecl>& vars) {
  AtomicComponent a;
  a.name = action_component_name(act.name);
  auto reads = action_reads(act, vars);
  auto writes = action_writes(act, vars);
  std::set<std::string> touched(reads.begin(), reads.end());
  touched.insert(writes.begin(), writes.end());
  for (const auto& n : in_decl_order(touched, vars)) a.vars.push_back(decl_of(vars, n));

  port(a, "work");
  port(a, "done");
  for (const auto& x : reads) port(a, "read_" + x, x);
  for (const auto& y : writes) port(a, "write_" + y, y);

  std::vector<std::string> chain{"IDLE"};
  for (const auto& x : reads) chain.push_back("R_" + x);
  for (const auto& y : writes) chain.push_back("W_" + y);
  chain.push_back("FIN");
  a.locations = chain;
  a.initial = "IDLE";

  // the body runs on the mirrors once every input has been received
  std::size_t compute_at = reads.size();  // index of the transition carrying the body
  std::vector<std::string> labels{"work"};
  for (const auto& x : reads) labels.push_back("read_" + x);
  for (const auto& y : writes) labels.push_back("write_" + y);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    on(a, chain[i], labels[i], chain[i + 1], nullptr, i == compute_at ? act.body : Program{});
  }
  on(a, "FIN", "done", "IDLE");
  return a;
}

AtomicComponent create_step(const SfcStep& s, bool literal) {
  AtomicComponent a;
  a.name = step_component_name(s.name);
  if (literal) {
    loc(a, {"DISABLED", "ACTIVE", "ACTION"});
    for (const char* p : {"tIn", "tOut", "fTick", "act"}) port(a, p);
    on(a, "ACTIVE", "tOut", "DISABLED");
    on(a, "DISABLED", "tIn", "ACTIVE");
    on(a, "DISABLED", "fTick", "DISABLED");
    on(a, "ACTIVE", "fTick", "ACTION");
    on(a, "ACTION", "act", "ACTIVE");
  } else {
    loc(a, {"DISABLED", "ACTIVE", "ACTION", "ENTERED"});
    for (const char* p : {"tIn", "tOut", "fTick", "act", "start"}) port(a, p);
    on(a, "ACTIVE", "tOut", "DISABLED");
    on(a, "DISABLED", "tIn", "ENTERED");
    on(a, "DISABLED", "fTick", "DISABLED");
    on(a, "ACTIVE", "fTick", "ACTION");
    on(a, "ACTION", "act", "ACTIVE");
    on(a, "ENTERED", "fTick", "ACTION");
    on(a, "DISABLED", "start", "ACTIVE");
  }
  a.initial = "DISABLED";
  return a;
}

AtomicComponent create_guard(const SfcTransition& t, const std::vector<VarDecl>& vars, TemplateMode mode) {
  AtomicComponent a;
  a.name = guard_name(t.name);
  auto reads = guard_reads(t, vars);
  for (const auto& x : reads) a.vars.push_back(decl_of(vars, x));
  bool ext = mode == TemplateMode::extended;

  a.locations.push_back("WAIT");
  for (const auto& x : reads) a.locations.push_back("READ_" + x);
  a.locations.push_back("GUARD");
  if (ext) a.locations.push_back("ACT");
  a.locations.push_back("DONE");
  a.initial = "WAIT";

  for (const auto& x : reads) port(a, "val_" + x, x);
  port(a, "guard");
  port(a, "tTick");
  port(a, "fTick");
  if (ext) port(a, "act");

  std::vector<std::string> chain{"WAIT"};
  for (const auto& x : reads) chain.push_back("READ_" + x);
  chain.push_back("GUARD");
  on(a, "WAIT", "tTick", chain[1]);
  for (std::size_t i = 0; i < reads.size(); ++i) on(a, chain[i + 1], "val_" + reads[i], chain[i + 2]);
  on(a, "GUARD", "fTick", "WAIT");
  if (ext) {
    on(a, "GUARD", "guard", "ACT", t.guard);
    on(a, "ACT", "act", "DONE", t.guard);
  } else {
    on(a, "GUARD", "guard", "DONE", t.guard);
  }
  on(a, "DONE", "fTick", "WAIT");
  return a;
}

AtomicComponent create_manager() {
  AtomicComponent a;
  a.name = manager_name();
  loc(a, {"WORK", "TRAN", "DONE"});
  for (const char* p : {"wTick", "tTick", "fTick"}) port(a, p);
  on(a, "WORK", "tTick", "TRAN");
  on(a, "TRAN", "fTick", "DONE");
  on(a, "DONE", "wTick", "WORK");
  a.initial = "DONE";
  return a;
}

AtomicComponent create_gv(const VarDecl& x, bool literal) {
  AtomicComponent a;
  a.name = gv_name(x.name);
  for (const char* n : {"t", "v", "w"}) {
    VarDecl d = x;
    d.name = n;
    a.vars.push_back(d);
  }
  loc(a, {"READ", "WRITE"});
  port(a, "read", "v");
  port(a, "write", "w");
  port(a, "tTick");
  port(a, "wTick");
  on(a, "READ", "read", "READ");
  on(a, "READ", "write", "READ", nullptr, parse_program("t := w;"));
  on(a, "READ", "tTick", "WRITE", nullptr, parse_program("v := t;"));
  on(a, "WRITE", "read", "WRITE");
  on(a, "WRITE", "wTick", "READ");
  a.initial = literal ? "READ" : "WRITE";
  return a;
}

AtomicComponent create_starter(const std::string& step) {
  AtomicComponent a;
  a.name = starter_name(step);
  loc(a, {"DISABLED", "ACTIVE"});
  port(a, "tOut");
  port(a, "wTick");
  on(a, "ACTIVE", "tOut", "DISABLED");
  on(a, "DISABLED", "wTick", "DISABLED");
  a.initial = "ACTIVE";
  return a;
}

nlohmann::ordered_json TraceMap::to_json() const {
  nlohmann::ordered_json j;
  j["steps"] = steps;
  nlohmann::ordered_json acts = nlohmann::ordered_json::object();
  for (const auto& [a, e] : actions) acts[a] = {{"component", e.component}, {"acb", e.acb}};
  j["actions"] = acts;
  j["vars"] = vars;
  j["transitions"] = transitions;
  j["starters"] = starters;
  j["manager"] = manager;
  j["steps_of_action"] = steps_of_action;
  return j;
}

TransformResult transform(const SfcModel& m, const TransformOptions& opt) {
  const bool ext = opt.mode == TemplateMode::extended;
  if (ext && m.dialect != Dialect::extended_syntax) {
    throw TransformError("extended templates need an extended-syntax SFC");
  }
  for (const auto& s : m.steps) {
    for (const auto& b : s.blocks) {
      if (!ext && b.qualifier != Qualifier::N) {
        throw TransformError(std::string("qualifier ") + qualifier_name(b.qualifier) + " in step '" + s.name +
                             "' needs extended templates (only N qualifier is supported)");
      }
    }
  }
  for (const auto& t : m.transitions) {
    for (const auto& s : t.src) {
      if (std::find(t.tgt.begin(), t.tgt.end(), s) != t.tgt.end()) {
        throw TransformError("transition '" + t.name + "' has step '" + s +
                             "' as both source and target, which would put one component twice in a connector");
      }
    }
  }

  TransformResult r;
  ComposedModel& b = r.model;
  TraceMap& tm = r.trace;
  b.name = m.name;
  const auto mode = opt.mode;
  const bool lit = opt.literal_templates;

  for (const auto& x : m.vars) {
    b.atomics.push_back(create_gv(x, lit));
    tm.vars[x.name] = b.atomics.back().name;
  }
  for (const auto& a : m.actions) b.atomics.push_back(create_action_component(a, m.vars));
  for (const auto& a : m.actions) {
    b.atomics.push_back(create_acb(a.name, mode));
    tm.actions[a.name] = {action_component_name(a.name), acb_name(a.name)};
  }
  for (const auto& s : m.steps) {
    b.atomics.push_back(create_step(s, lit));
    tm.steps[s.name] = b.atomics.back().name;
  }
  for (const auto& s : m.initial) {
    b.atomics.push_back(create_starter(s));
    tm.starters[s] = b.atomics.back().name;
  }
  for (const auto& t : m.transitions) {
    b.atomics.push_back(create_guard(t, m.vars, mode));
    tm.transitions[t.name] = b.atomics.back().name;
  }
  b.atomics.push_back(create_manager());
  tm.manager = manager_name();
  for (std::size_t a = 0; a < m.actions.size(); ++a) {
    auto& list = tm.steps_of_action[m.actions[a].name];
    for (std::size_t s : m.steps_of_action(a)) list.push_back(m.steps[s].name);
  }

  auto conn = [&b](std::string name, Endpoint sender, std::vector<Endpoint> receivers) {
    b.connectors.push_back({std::move(name), std::move(sender), std::move(receivers), {}});
  };
  std::vector<std::string> works, middle, ticks, guard_reads_c, guards_c;

  // variable access
  for (const auto& x : m.vars) {
    for (const auto& a : m.actions) {
      auto reads = action_reads(a, m.vars);
      auto writes = action_writes(a, m.vars);
      if (std::find(reads.begin(), reads.end(), x.name) != reads.end()) {
        conn("c_read_" + x.name + "_" + a.name, {gv_name(x.name), "read"},
             {{action_component_name(a.name), "read_" + x.name}});
        middle.push_back(b.connectors.back().name);
      }
      if (std::find(writes.begin(), writes.end(), x.name) != writes.end()) {
        conn("c_write_" + x.name + "_" + a.name, {action_component_name(a.name), "write_" + x.name},
             {{gv_name(x.name), "write"}});
        middle.push_back(b.connectors.back().name);
      }
    }
    for (const auto& t : m.transitions) {
      auto reads = guard_reads(t, m.vars);
      if (std::find(reads.begin(), reads.end(), x.name) != reads.end()) {
        conn("c_gread_" + x.name + "_" + t.name, {gv_name(x.name), "read"}, {{guard_name(t.name), "val_" + x.name}});
        middle.push_back(b.connectors.back().name);
        guard_reads_c.push_back(b.connectors.back().name);
      }
    }
  }
  // work / done
  for (const auto& a : m.actions) {
    conn("c_work_" + a.name, {acb_name(a.name), "work"}, {{action_component_name(a.name), "work"}});
    works.push_back(b.connectors.back().name);
    conn("c_done_" + a.name, {acb_name(a.name), "done"}, {{action_component_name(a.name), "done"}});
    middle.push_back(b.connectors.back().name);
  }
  // starters
  for (const auto& s : m.initial) {
    conn("c_start_" + s, {starter_name(s), "tOut"}, {{step_component_name(s), lit ? "tIn" : "start"}});
    middle.push_back(b.connectors.back().name);
  }
  // step transitions
  for (const auto& t : m.transitions) {
    std::vector<Endpoint> rec;
    for (const auto& s : t.src) rec.push_back({step_component_name(s), "tOut"});
    for (const auto& s : t.tgt) rec.push_back({step_component_name(s), "tIn"});
    conn("c_guard_" + t.name, {guard_name(t.name), "guard"}, std::move(rec));
    middle.push_back(b.connectors.back().name);
    guards_c.push_back(b.connectors.back().name);
  }
  // activation
  for (const auto& s : m.steps) {
    std::vector<Endpoint> rec;
    for (const auto& blk : s.blocks) {
      if (blk.qualifier == Qualifier::P0 || blk.qualifier == Qualifier::P1) continue;
      rec.push_back({acb_name(blk.action), qualifier_name(blk.qualifier)});
    }
    conn("c_act_" + s.name, {step_component_name(s.name), "act"}, std::move(rec));
    middle.push_back(b.connectors.back().name);
  }
  if (ext) {
    for (const auto& t : m.transitions) {
      std::vector<Endpoint> rec;
      std::set<std::string> seen;
      auto add = [&](const std::string& step, Qualifier q) {
        const auto& st = m.steps[*m.step_index(step)];
        for (const auto& blk : st.blocks) {
          if (blk.qualifier == q && seen.insert(blk.action).second) rec.push_back({acb_name(blk.action), "N"});
        }
      };
      for (const auto& s : t.src) add(s, Qualifier::P0);
      for (const auto& s : t.tgt) add(s, Qualifier::P1);
      conn("c_gact_" + t.name, {guard_name(t.name), "act"}, std::move(rec));
      middle.push_back(b.connectors.back().name);
    }
  }
  // manager ticks
  {
    std::vector<Endpoint> w, t, f;
    for (const auto& a : m.actions) w.push_back({acb_name(a.name), "wTick"});
    for (const auto& x : m.vars) w.push_back({gv_name(x.name), "wTick"});
    for (const auto& s : m.initial) w.push_back({starter_name(s), "wTick"});
    for (const auto& a : m.actions) t.push_back({acb_name(a.name), "tTick"});
    for (const auto& g : m.transitions) t.push_back({guard_name(g.name), "tTick"});
    for (const auto& x : m.vars) t.push_back({gv_name(x.name), "tTick"});
    for (const auto& s : m.steps) f.push_back({step_component_name(s.name), "fTick"});
    for (const auto& g : m.transitions) f.push_back({guard_name(g.name), "fTick"});
    conn("c_wtick", {manager_name(), "wTick"}, std::move(w));
    conn("c_ttick", {manager_name(), "tTick"}, std::move(t));
    conn("c_ftick", {manager_name(), "fTick"}, std::move(f));
    ticks = {"c_wtick", "c_ttick", "c_ftick"};
  }

  // priorities: ticks < middle < work; work by action order; every guard read
  // before any guard fires; guards by transition priority
  for (const auto& tk : ticks) {
    for (const auto& c : middle) b.priority.emplace_back(tk, c);
    for (const auto& c : works) b.priority.emplace_back(tk, c);
  }
  for (const auto& c : middle) {
    for (const auto& w : works) b.priority.emplace_back(c, w);
  }
  for (std::size_t i = 0; i < m.action_order.size(); ++i) {
    for (std::size_t j = i + 1; j < m.action_order.size(); ++j) {
      b.priority.emplace_back("c_work_" + m.action_order[j], "c_work_" + m.action_order[i]);
    }
  }
  for (const auto& g : guards_c) {
    for (const auto& r : guard_reads_c) b.priority.emplace_back(g, r);
  }
  if (opt.sfc_priority) {
    auto ix = IndexedSfc::build(m);
    for (std::size_t t = 0; t < m.transitions.size(); ++t) {
      for (std::size_t u = 0; u < m.transitions.size(); ++u) {
        if (!ix.higher[t][u]) continue;
        bool shared = false;
        for (auto s : ix.transitions[t].src)
          for (auto q : ix.transitions[u].src) shared = shared || s == q;
        if (shared) b.priority.emplace_back("c_guard_" + m.transitions[t].name, "c_guard_" + m.transitions[u].name);
      }
    }
  }

  std::set<std::string> names;
  for (const auto& a : b.atomics) {
    if (!names.insert(a.name).second) throw TransformError("generated component name clash: '" + a.name + "'");
  }
  names.clear();
  for (const auto& c : b.connectors) {
    if (!names.insert(c.name).second) throw TransformError("generated connector name clash: '" + c.name + "'");
  }
  return r;
}

}  // namespace sfcbip
