#include "sfcbip/invariants.hpp"

#include <map>
#include <set>

namespace sfcbip {

namespace {

std::shared_ptr<Inv> node(InvKind k) {
  auto n = std::make_shared<Inv>();
  n->kind = k;
  return n;
}

InvPtr active_atom(const SfcModel& m, const std::string& step) {
  auto i = m.step_index(step);
  if (!i) throw InvError("unknown step '" + step + "'");
  auto n = node(InvKind::active);
  n->name = step;
  n->index = *i;
  return n;
}

InvPtr enabled_atom(const SfcModel& m, const std::string& action) {
  auto i = m.action_index(action);
  if (!i) throw InvError("unknown action '" + action + "'");
  auto n = node(InvKind::enabled);
  n->name = action;
  n->index = *i;
  return n;
}

InvPtr at_atom(const ComposedModel& b, const std::string& comp, const std::string& loc) {
  auto i = b.atomic_index(comp);
  if (!i) throw InvError("unknown component '" + comp + "'");
  auto l = b.atomics[*i].location_index(loc);
  if (!l) throw InvError("unknown location '" + loc + "' of component '" + comp + "'");
  auto n = node(InvKind::at);
  n->component = comp;
  n->name = loc;
  n->index = *i;
  n->location = *l;
  return n;
}

Scope bip_scope(const ComposedModel& b) {
  std::vector<std::size_t> offset;
  std::size_t total = 0;
  for (const auto& a : b.atomics) {
    offset.push_back(total);
    total += a.vars.size();
  }
  return [&b, offset](const std::string& name) -> std::optional<ScopeEntry> {
    auto dot = name.find('.');
    if (dot == std::string::npos) return std::nullopt;
    auto ai = b.atomic_index(name.substr(0, dot));
    if (!ai) return std::nullopt;
    const auto& a = b.atomics[*ai];
    auto vi = a.var_index(name.substr(dot + 1));
    if (!vi) return std::nullopt;
    return ScopeEntry{static_cast<int>(offset[*ai] + *vi), a.vars[*vi].type};
  };
}

InvPtr cond_atom(ExprPtr e, const Scope& scope) {
  Diagnostics d;
  auto r = resolve_expr(e, scope, d, Type::Bool);
  if (!r || !d.empty()) throw InvError(format_diagnostics(d));
  auto n = node(InvKind::cond);
  n->cond = std::move(e);
  n->resolved = std::move(r);
  return n;
}

struct AtomTable {
  std::vector<InvPtr> atoms;
};

InvPtr from_expr(const ExprPtr& e, const AtomTable& tab, const Scope& scope) {
  switch (e->op) {
    case Op::And: return inv_and(from_expr(e->lhs, tab, scope), from_expr(e->rhs, tab, scope));
    case Op::Or: return inv_or(from_expr(e->lhs, tab, scope), from_expr(e->rhs, tab, scope));
    case Op::Not: return inv_not(from_expr(e->lhs, tab, scope));
    case Op::BoolLit: return inv_const(e->value != 0);
    case Op::Extern: return tab.atoms.at(static_cast<std::size_t>(e->value));
    default:
      if (contains_extern(*e)) throw InvError("invariant atom used inside an arithmetic expression");
      return cond_atom(e, scope);
  }
}

std::string read_arg(TokenCursor& cur) { return cur.expect_ident("as atom argument"); }

InvPtr parse_with(std::string_view text, const std::function<InvPtr(const std::string&, TokenCursor&)>& atom,
                  const Scope& scope) {
  AtomTable tab;
  ExternHook hook = [&](const std::string& name, TokenCursor& cur) {
    cur.expect(Tok::LParen, "after atom name");
    tab.atoms.push_back(atom(name, cur));
    cur.expect(Tok::RParen, "to close atom");
    return make_extern(static_cast<Value>(tab.atoms.size() - 1), name);
  };
  auto e = parse_expr(text, &hook);
  return from_expr(e, tab, scope);
}

}  // namespace

InvPtr inv_const(bool v) {
  auto n = node(InvKind::constant);
  n->value = v;
  return n;
}

InvPtr inv_not(InvPtr a) {
  auto n = node(InvKind::neg);
  n->kids = {std::move(a)};
  return n;
}

InvPtr inv_and(InvPtr a, InvPtr b) {
  auto n = node(InvKind::conj);
  n->kids = {std::move(a), std::move(b)};
  return n;
}

InvPtr inv_or(InvPtr a, InvPtr b) {
  auto n = node(InvKind::disj);
  n->kids = {std::move(a), std::move(b)};
  return n;
}

InvPtr parse_sfc_inv(std::string_view text, const SfcModel& m) {
  auto atom = [&m](const std::string& name, TokenCursor& cur) -> InvPtr {
    if (name == "active") return active_atom(m, read_arg(cur));
    if (name == "enabled") return enabled_atom(m, read_arg(cur));
    throw InvError("unknown SFC invariant atom '" + name + "' (expected active or enabled)");
  };
  return parse_with(text, atom, scope_of(m.vars));
}

InvPtr parse_bip_inv(std::string_view text, const ComposedModel& b) {
  auto atom = [&b](const std::string& name, TokenCursor& cur) -> InvPtr {
    if (name != "at") throw InvError("unknown BIP invariant atom '" + name + "' (expected at)");
    auto comp = read_arg(cur);
    cur.expect(Tok::Comma, "between component and location");
    return at_atom(b, comp, read_arg(cur));
  };
  return parse_with(text, atom, bip_scope(b));
}

bool eval_inv(const Inv& inv, const Configuration& c) {
  switch (inv.kind) {
    case InvKind::constant: return inv.value;
    case InvKind::cond: return eval_bool(*inv.resolved, c.f.values);
    case InvKind::active: return c.active_steps[inv.index];
    case InvKind::enabled: return c.active_actions[inv.index];
    case InvKind::at: throw InvError("at() is not an SFC atom");
    case InvKind::neg: return !eval_inv(*inv.kids[0], c);
    case InvKind::conj: return eval_inv(*inv.kids[0], c) && eval_inv(*inv.kids[1], c);
    case InvKind::disj: return eval_inv(*inv.kids[0], c) || eval_inv(*inv.kids[1], c);
  }
  return false;
}

bool eval_inv(const Inv& inv, const BipState& s) {
  switch (inv.kind) {
    case InvKind::constant: return inv.value;
    case InvKind::cond: return eval_bool(*inv.resolved, s.vars);
    case InvKind::at: return s.loc[inv.index] == inv.location;
    case InvKind::active:
    case InvKind::enabled: throw InvError("active()/enabled() are not BIP atoms");
    case InvKind::neg: return !eval_inv(*inv.kids[0], s);
    case InvKind::conj: return eval_inv(*inv.kids[0], s) && eval_inv(*inv.kids[1], s);
    case InvKind::disj: return eval_inv(*inv.kids[0], s) || eval_inv(*inv.kids[1], s);
  }
  return false;
}

namespace {

bool simple_cond(const Expr& e) { return e.op == Op::Var || e.op == Op::BoolLit || e.op == Op::IntLit; }

std::string print(const Inv& n, bool under_not) {
  switch (n.kind) {
    case InvKind::constant: return n.value ? "true" : "false";
    case InvKind::cond: {
      auto s = to_string(*n.cond);
      return under_not && !simple_cond(*n.cond) ? "(" + s + ")" : s;
    }
    case InvKind::active: return "active(" + n.name + ")";
    case InvKind::enabled: return "enabled(" + n.name + ")";
    case InvKind::at: return "at(" + n.component + ", " + n.name + ")";
    case InvKind::neg: {
      const Inv& k = *n.kids[0];
      if (k.kind == InvKind::conj || k.kind == InvKind::disj) return "!(" + print(k, false) + ")";
      return "!" + print(k, true);
    }
    case InvKind::conj:
    case InvKind::disj: {
      bool is_and = n.kind == InvKind::conj;
      auto side = [&](const Inv& k, bool right) {
        bool wrap = (is_and && k.kind == InvKind::disj) || (!is_and && k.kind == InvKind::conj) ||
                    (right && k.kind == n.kind);
        auto s = print(k, false);
        return wrap ? "(" + s + ")" : s;
      };
      return side(*n.kids[0], false) + (is_and ? " && " : " || ") + side(*n.kids[1], true);
    }
  }
  return "";
}

}  // namespace

std::string to_string(const Inv& inv, InvSide) { return print(inv, false); }

bool structurally_equal(const Inv& a, const Inv& b) {
  if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
  switch (a.kind) {
    case InvKind::constant:
      if (a.value != b.value) return false;
      break;
    case InvKind::cond:
      if (!structurally_equal(*a.cond, *b.cond)) return false;
      break;
    case InvKind::active:
    case InvKind::enabled:
    case InvKind::at:
      if (a.name != b.name || a.component != b.component) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.kids.size(); ++i) {
    if (!structurally_equal(*a.kids[i], *b.kids[i])) return false;
  }
  return true;
}

namespace {

InvPtr nnf(const InvPtr& n, bool negate) {
  switch (n->kind) {
    case InvKind::constant: return negate ? inv_const(!n->value) : n;
    case InvKind::neg: return nnf(n->kids[0], !negate);
    case InvKind::conj:
    case InvKind::disj: {
      auto l = nnf(n->kids[0], negate);
      auto r = nnf(n->kids[1], negate);
      bool conj = (n->kind == InvKind::conj) != negate;
      return conj ? inv_and(l, r) : inv_or(l, r);
    }
    default: return negate ? inv_not(n) : n;
  }
}

InvPtr fold(std::vector<InvPtr> xs, bool conj) {
  if (xs.empty()) return inv_const(conj);
  InvPtr acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = conj ? inv_and(acc, xs[i]) : inv_or(acc, xs[i]);
  return acc;
}

}  // namespace

InvPtr normalize_nnf(const InvPtr& inv) { return nnf(inv, false); }

InvPtr structural_invariant(const SfcModel& m) {
  std::vector<InvPtr> per_action;
  for (std::size_t a = 0; a < m.actions.size(); ++a) {
    std::vector<InvPtr> some, none;
    for (std::size_t s : m.steps_of_action(a)) {
      some.push_back(active_atom(m, m.steps[s].name));
      none.push_back(inv_not(active_atom(m, m.steps[s].name)));
    }
    auto en = enabled_atom(m, m.actions[a].name);
    InvPtr on = some.empty() ? inv_const(false) : inv_and(fold(some, false), en);
    InvPtr off = none.empty() ? inv_not(en) : inv_and(fold(none, true), inv_not(en));
    per_action.push_back(some.empty() ? off : inv_or(on, off));
  }
  return fold(per_action, true);
}

namespace {

template <class F>
InvPtr map_atoms(const InvPtr& n, const F& f) {
  switch (n->kind) {
    case InvKind::neg: return inv_not(map_atoms(n->kids[0], f));
    case InvKind::conj: return inv_and(map_atoms(n->kids[0], f), map_atoms(n->kids[1], f));
    case InvKind::disj: return inv_or(map_atoms(n->kids[0], f), map_atoms(n->kids[1], f));
    case InvKind::constant: return n;
    default: return f(*n);
  }
}

template <class Map>
std::map<std::string, std::string> reverse(const Map& m) {
  std::map<std::string, std::string> r;
  for (const auto& [k, v] : m) r[v] = k;
  return r;
}

}  // namespace

InvPtr t_i(const Inv& bip, const TraceMap& tm, const SfcModel& m, const ComposedModel&) {
  auto step_of = reverse(tm.steps);
  auto gv_of = reverse(tm.vars);
  std::map<std::string, std::string> acb_of;
  for (const auto& [a, e] : tm.actions) acb_of[e.acb] = a;

  auto steps_active = [&](const std::string& action) {
    std::vector<InvPtr> xs;
    auto it = tm.steps_of_action.find(action);
    if (it != tm.steps_of_action.end()) {
      for (const auto& s : it->second) xs.push_back(active_atom(m, s));
    }
    return fold(xs, false);
  };

  auto atom = [&](const Inv& a) -> InvPtr {
    if (a.kind == InvKind::at) {
      if (auto s = step_of.find(a.component); s != step_of.end()) {
        auto act = active_atom(m, s->second);
        return a.name == "DISABLED" ? inv_not(act) : act;
      }
      if (auto ac = acb_of.find(a.component); ac != acb_of.end()) {
        return a.name == "ENABLE" ? steps_active(ac->second) : inv_const(false);
      }
      return inv_const(false);
    }
    // variable condition
    std::set<std::string> vars;
    collect_vars(*a.cond, vars);
    std::set<std::string> comps, locals;
    for (const auto& v : vars) {
      auto dot = v.find('.');
      comps.insert(v.substr(0, dot));
      locals.insert(v.substr(dot + 1));
    }
    if (comps.size() > 1) throw InvError("condition '" + to_string(*a.cond) + "' mixes components");
    if (comps.empty()) return cond_atom(a.cond, scope_of(m.vars));
    const std::string& comp = *comps.begin();
    if (auto g = gv_of.find(comp); g != gv_of.end()) {
      if (locals == std::set<std::string>{"t"}) return inv_const(true);
      if (locals != std::set<std::string>{"v"}) {
        throw InvError("GV condition '" + to_string(*a.cond) + "' must mention exactly one of t or v");
      }
      const std::string& x = g->second;
      auto renamed = map_vars(a.cond, [&x](const Expr&) { return make_var(x); });
      return cond_atom(renamed, scope_of(m.vars));
    }
    if (auto ac = acb_of.find(comp); ac != acb_of.end()) {
      if (locals != std::set<std::string>{"e"}) {
        throw InvError("ACB condition '" + to_string(*a.cond) + "' may only mention e");
      }
      Scope one = [](const std::string&) -> std::optional<ScopeEntry> { return ScopeEntry{0, Type::Bool}; };
      Diagnostics d;
      auto r = resolve_expr(a.cond, one, d, Type::Bool);
      Value on = 1, off = 0;
      bool when_on = eval_bool(*r, std::span<const Value>(&on, 1));
      bool when_off = eval_bool(*r, std::span<const Value>(&off, 1));
      auto en = enabled_atom(m, ac->second);
      if (when_on && when_off) return inv_const(true);
      if (!when_on && !when_off) return inv_const(false);
      return when_on ? en : inv_not(en);
    }
    return inv_const(true);
  };
  return map_atoms(std::make_shared<Inv>(bip), atom);
}

InvPtr t_r(const Inv& sfc, const TraceMap& tm, const SfcModel&, const ComposedModel& b) {
  auto scope = bip_scope(b);
  auto atom = [&](const Inv& a) -> InvPtr {
    switch (a.kind) {
      case InvKind::active: return inv_not(at_atom(b, tm.steps.at(a.name), "DISABLED"));
      case InvKind::enabled:
        return cond_atom(make_binary(Op::Eq, make_var(tm.actions.at(a.name).acb + ".e"), make_bool(true)), scope);
      case InvKind::cond: {
        auto renamed = map_vars(a.cond, [&tm](const Expr& v) { return make_var(tm.vars.at(v.name) + ".v"); });
        return cond_atom(renamed, scope);
      }
      default: throw InvError("at() is not an SFC atom");
    }
  };
  return map_atoms(std::make_shared<Inv>(sfc), atom);
}

}  // namespace sfcbip
