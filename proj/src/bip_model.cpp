#include "sfcbip/bip_model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace sfcbip {

namespace {

template <class T>
std::optional<std::size_t> find_named(const std::vector<T>& items, std::string_view name) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].name == name) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> AtomicComponent::location_index(std::string_view n) const {
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (locations[i] == n) return i;
  }
  return std::nullopt;
}
std::optional<std::size_t> AtomicComponent::port_index(std::string_view n) const { return find_named(ports, n); }
std::optional<std::size_t> AtomicComponent::var_index(std::string_view n) const { return find_named(vars, n); }

std::optional<std::size_t> ComposedModel::atomic_index(std::string_view n) const { return find_named(atomics, n); }
std::optional<std::size_t> ComposedModel::connector_index(std::string_view n) const {
  return find_named(connectors, n);
}
const AtomicComponent* ComposedModel::atomic(std::string_view n) const {
  auto i = atomic_index(n);
  return i ? &atomics[*i] : nullptr;
}
const Connector* ComposedModel::connector(std::string_view n) const {
  auto i = connector_index(n);
  return i ? &connectors[*i] : nullptr;
}

std::size_t BipStateHash::operator()(const BipState& s) const {
  std::size_t h = 1469598103934665603ull;
  for (auto l : s.loc) h = (h ^ l) * 1099511628211ull;
  h = (h ^ 0x9e37) * 1099511628211ull;
  for (auto v : s.vars) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
  return h ^ static_cast<std::size_t>(s.error);
}

// ---------------------------------------------------------------------------

namespace {

struct BipParser {
  TokenCursor cur;
  Diagnostics pending;

  Endpoint endpoint() {
    Endpoint e;
    e.component = cur.expect_ident("as component name");
    cur.expect(Tok::Dot, "between component and port");
    e.port = cur.expect_ident("as port name");
    return e;
  }

  AtomicComponent atomic() {
    AtomicComponent a;
    a.pos = cur.peek().pos;
    a.name = cur.expect_ident("as atomic name");
    cur.expect(Tok::LBrace, "to open atomic");
    while (!cur.at(Tok::RBrace)) {
      if (cur.at(Tok::End)) cur.fail("unterminated atomic '" + a.name + "'");
      if (cur.accept_keyword("var")) {
        a.vars.push_back(parse_var_decl(cur, pending));
      } else if (cur.accept_keyword("port")) {
        BipPort p;
        p.pos = cur.peek().pos;
        p.name = cur.expect_ident("as port name");
        if (cur.accept_keyword("binds")) p.binds = cur.expect_ident("as bound variable");
        cur.expect(Tok::Semi, "after port");
        a.ports.push_back(std::move(p));
      } else if (cur.accept_keyword("location")) {
        SourcePos pos = cur.peek().pos;
        std::string l = cur.expect_ident("as location name");
        if (cur.accept_keyword("init")) {
          if (!a.initial.empty()) {
            pending.push_back({"multiple-initial", "atomic '" + a.name + "' declares more than one initial location", pos});
          } else {
            a.initial = l;
          }
        }
        cur.expect(Tok::Semi, "after location");
        a.locations.push_back(std::move(l));
      } else if (cur.accept_keyword("on")) {
        BipTransition t;
        t.pos = cur.peek().pos;
        t.port = cur.expect_ident("as port");
        cur.expect_keyword("from");
        t.src = cur.expect_ident("as source location");
        cur.expect_keyword("to");
        t.tgt = cur.expect_ident("as target location");
        if (cur.accept_keyword("when")) t.guard = parse_expr(cur);
        if (cur.accept_keyword("do")) {
          cur.expect(Tok::LBrace, "to open update");
          t.update = parse_program_body(cur);
          cur.expect(Tok::RBrace, "to close update");
        }
        cur.expect(Tok::Semi, "after transition");
        a.transitions.push_back(std::move(t));
      } else {
        cur.fail("expected var, port, location or on, found '" + cur.peek().text + "'");
      }
    }
    cur.expect(Tok::RBrace, "to close atomic");
    return a;
  }

  ComposedModel parse() {
    ComposedModel m;
    cur.expect_keyword("bip");
    m.name = cur.expect_ident("as model name");
    cur.expect(Tok::LBrace, "to open model");
    while (!cur.at(Tok::RBrace)) {
      if (cur.at(Tok::End)) cur.fail("unterminated model, expected '}'");
      if (cur.accept_keyword("atomic")) {
        m.atomics.push_back(atomic());
      } else if (cur.accept_keyword("connector")) {
        Connector c;
        c.pos = cur.peek().pos;
        c.name = cur.expect_ident("as connector name");
        cur.expect(Tok::Colon, "after connector name");
        c.sender = endpoint();
        cur.expect(Tok::Arrow, "after sender");
        if (!cur.at(Tok::Semi)) {
          c.receivers.push_back(endpoint());
          while (cur.accept(Tok::Comma)) c.receivers.push_back(endpoint());
        }
        cur.expect(Tok::Semi, "after connector");
        m.connectors.push_back(std::move(c));
      } else if (cur.accept_keyword("priority")) {
        std::vector<std::string> chain{cur.expect_ident("in priority")};
        while (cur.accept(Tok::Lt)) chain.push_back(cur.expect_ident("in priority"));
        cur.expect(Tok::Semi, "after priority");
        if (chain.size() < 2) cur.fail("priority needs at least two connectors");
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) m.priority.emplace_back(chain[i], chain[i + 1]);
      } else {
        cur.fail("expected atomic, connector or priority, found '" + cur.peek().text + "'");
      }
    }
    cur.expect(Tok::RBrace, "to close model");
    if (!cur.at(Tok::End)) cur.fail("unexpected '" + cur.peek().text + "' after model");
    return m;
  }
};

std::vector<std::vector<bool>> closure(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<std::vector<bool>> hi(n, std::vector<bool>(n, false));
  for (auto [lo, h] : pairs) hi[lo][h] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (hi[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (hi[k][j]) hi[i][j] = true;
  return hi;
}

}  // namespace

ComposedModel parse_bip_syntax(std::string_view text) {
  BipParser p{TokenCursor(tokenize(text)), {}};
  return p.parse();
}

BipParseResult parse_bip(std::string_view text) {
  BipParseResult r;
  try {
    BipParser p{TokenCursor(tokenize(text)), {}};
    ComposedModel m = p.parse();
    r.diags = std::move(p.pending);
    Diagnostics v = validate_bip(m);
    r.diags.insert(r.diags.end(), v.begin(), v.end());
    r.model = std::move(m);
  } catch (const SyntaxError& e) {
    r.diags.push_back(e.diagnostic());
  }
  return r;
}

Diagnostics validate_bip(const ComposedModel& m) {
  Diagnostics diags;
  std::set<std::string> anames;
  for (const auto& a : m.atomics) {
    const std::string in = "atomic '" + a.name + "': ";
    if (!anames.insert(a.name).second) diags.push_back({"duplicate-name", "duplicate atomic '" + a.name + "'", a.pos});
    std::set<std::string> seen;
    for (const auto& v : a.vars) {
      if (!seen.insert(v.name).second) diags.push_back({"duplicate-name", in + "duplicate variable '" + v.name + "'", a.pos});
      if (v.lo > v.hi) diags.push_back({"empty-range", in + "variable '" + v.name + "' has an empty range", a.pos});
      else if (!v.admits(v.init))
        diags.push_back({"init-range", in + "initial value of '" + v.name + "' outside its range", a.pos});
    }
    seen.clear();
    for (const auto& p : a.ports) {
      if (!seen.insert(p.name).second) diags.push_back({"duplicate-name", in + "duplicate port '" + p.name + "'", p.pos});
      if (p.binds && !a.var_index(*p.binds))
        diags.push_back({"unknown-variable", in + "port '" + p.name + "' binds undeclared variable '" + *p.binds + "'", p.pos});
    }
    seen.clear();
    for (const auto& l : a.locations) {
      if (!seen.insert(l).second) diags.push_back({"duplicate-name", in + "duplicate location '" + l + "'", a.pos});
    }
    if (a.initial.empty()) diags.push_back({"no-initial", in + "no initial location", a.pos});
    for (const auto& t : a.transitions) {
      if (!a.port_index(t.port)) diags.push_back({"unknown-port", in + "transition on undeclared port '" + t.port + "'", t.pos});
      if (!a.location_index(t.src))
        diags.push_back({"unknown-location", in + "transition from undeclared location '" + t.src + "'", t.pos});
      if (!a.location_index(t.tgt))
        diags.push_back({"unknown-location", in + "transition to undeclared location '" + t.tgt + "'", t.pos});
      if (t.guard) {
        Diagnostics d;
        resolve_expr(t.guard, scope_of(a.vars), d, Type::Bool);
        for (auto& x : d) x.message = in + "guard: " + x.message;
        diags.insert(diags.end(), d.begin(), d.end());
      }
      Diagnostics d = typecheck(t.update, a.vars);
      for (auto& x : d) x.message = in + "update: " + x.message;
      diags.insert(diags.end(), d.begin(), d.end());
    }
  }

  auto bound_type = [&](const Endpoint& e) -> std::optional<const VarDecl*> {
    const auto* a = m.atomic(e.component);
    if (!a) return std::nullopt;
    auto p = a->port_index(e.port);
    if (!p || !a->ports[*p].binds) return std::nullopt;
    auto v = a->var_index(*a->ports[*p].binds);
    if (!v) return std::nullopt;
    return &a->vars[*v];
  };

  std::set<std::string> cnames;
  for (const auto& c : m.connectors) {
    const std::string in = "connector '" + c.name + "': ";
    if (!cnames.insert(c.name).second) diags.push_back({"duplicate-name", "duplicate connector '" + c.name + "'", c.pos});
    std::set<std::string> comps;
    std::vector<const Endpoint*> ends{&c.sender};
    for (const auto& r : c.receivers) ends.push_back(&r);
    for (const auto* e : ends) {
      const auto* a = m.atomic(e->component);
      if (!a) {
        diags.push_back({"unknown-component", in + "unknown component '" + e->component + "'", c.pos});
        continue;
      }
      if (!a->port_index(e->port))
        diags.push_back({"unknown-port", in + "unknown port '" + e->component + "." + e->port + "'", c.pos});
      if (!comps.insert(e->component).second)
        diags.push_back({"duplicate-endpoint", in + "component '" + e->component + "' appears twice", c.pos});
    }
    auto st = bound_type(c.sender);
    for (const auto& r : c.receivers) {
      auto rt = bound_type(r);
      if (!rt) continue;
      if (!st) {
        diags.push_back({"transfer-mismatch",
                         in + "receiver '" + r.component + "." + r.port + "' binds a variable but the sender binds none",
                         c.pos});
      } else if ((*st)->type != (*rt)->type) {
        diags.push_back({"transfer-mismatch", in + "sender and receiver '" + r.component + "." + r.port +
                                                  "' bind variables of different types", c.pos});
      }
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  bool ok = true;
  for (const auto& [lo, hi] : m.priority) {
    auto l = m.connector_index(lo);
    auto h = m.connector_index(hi);
    if (!l) diags.push_back({"unknown-connector", "priority names unknown connector '" + lo + "'", {}});
    if (!h) diags.push_back({"unknown-connector", "priority names unknown connector '" + hi + "'", {}});
    if (!l || !h) {
      ok = false;
      continue;
    }
    if (*l == *h) {
      diags.push_back({"priority-reflexive", "connector '" + lo + "' cannot have priority over itself", {}});
      ok = false;
      continue;
    }
    pairs.emplace_back(*l, *h);
  }
  if (ok) {
    auto hi = closure(m.connectors.size(), pairs);
    for (std::size_t i = 0; i < hi.size(); ++i) {
      if (hi[i][i]) {
        diags.push_back({"priority-cycle",
                         "connector priority is not acyclic (cycle through '" + m.connectors[i].name + "')", {}});
        break;
      }
    }
  }
  return diags;
}

// ---------------------------------------------------------------------------

std::string serialize(const AtomicComponent& a, int indent) {
  std::string pad(indent, ' ');
  std::string in = pad + "  ";
  std::ostringstream os;
  os << pad << "atomic " << a.name << " {\n";
  for (const auto& v : a.vars) {
    os << in << "var " << v.name << " : " << format_decl_type(v) << " = " << format_value(v, v.init) << ";\n";
  }
  for (const auto& p : a.ports) {
    os << in << "port " << p.name;
    if (p.binds) os << " binds " << *p.binds;
    os << ";\n";
  }
  for (const auto& l : a.locations) os << in << "location " << l << (l == a.initial ? " init" : "") << ";\n";
  for (const auto& t : a.transitions) {
    os << in << "on " << t.port << " from " << t.src << " to " << t.tgt;
    if (t.guard) os << " when " << to_string(*t.guard);
    if (!t.update.empty()) os << " do { " << to_string(t.update) << " }";
    os << ";\n";
  }
  os << pad << "}\n";
  return os.str();
}

std::string serialize(const ComposedModel& m) {
  std::ostringstream os;
  os << "bip " << m.name << " {\n";
  for (std::size_t i = 0; i < m.atomics.size(); ++i) {
    if (i) os << "\n";
    os << serialize(m.atomics[i]);
  }
  if (!m.connectors.empty()) os << "\n";
  for (const auto& c : m.connectors) {
    os << "  connector " << c.name << " : " << c.sender.component << "." << c.sender.port << " ->";
    for (std::size_t i = 0; i < c.receivers.size(); ++i) {
      os << (i ? ", " : " ") << c.receivers[i].component << "." << c.receivers[i].port;
    }
    os << ";\n";
  }
  if (!m.priority.empty()) os << "\n";
  for (const auto& [lo, hi] : m.priority) os << "  priority " << lo << " < " << hi << ";\n";
  os << "}\n";
  return os.str();
}

namespace {

bool same_guard(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return structurally_equal(*a, *b);
}

bool same_program(const Program& a, const Program& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].target != b[i].target || !structurally_equal(*a[i].value, *b[i].value)) return false;
  }
  return true;
}

}  // namespace

bool structurally_equal(const AtomicComponent& a, const AtomicComponent& b) {
  if (a.name != b.name || a.vars != b.vars || a.ports != b.ports || a.locations != b.locations ||
      a.initial != b.initial || a.transitions.size() != b.transitions.size())
    return false;
  for (std::size_t i = 0; i < a.transitions.size(); ++i) {
    const auto& x = a.transitions[i];
    const auto& y = b.transitions[i];
    if (x.port != y.port || x.src != y.src || x.tgt != y.tgt || !same_guard(x.guard, y.guard) ||
        !same_program(x.update, y.update))
      return false;
  }
  return true;
}

bool structurally_equal(const ComposedModel& a, const ComposedModel& b) {
  if (a.name != b.name || a.atomics.size() != b.atomics.size() || a.connectors != b.connectors ||
      a.priority != b.priority)
    return false;
  for (std::size_t i = 0; i < a.atomics.size(); ++i) {
    if (!structurally_equal(a.atomics[i], b.atomics[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

IndexedBip IndexedBip::build(const ComposedModel& m) {
  IndexedBip ix;
  ix.model = &m;
  Diagnostics sink;
  std::size_t offset = 0;
  for (const auto& a : m.atomics) {
    Atomic at;
    at.var_offset = offset;
    at.var_count = a.vars.size();
    offset += a.vars.size();
    Scope scope = scope_of(a.vars);
    for (const auto& p : a.ports) {
      at.port_slot.push_back(p.binds ? static_cast<int>(*a.var_index(*p.binds)) : -1);
    }
    at.by_port_loc.assign(a.ports.size(), std::vector<std::vector<std::size_t>>(a.locations.size()));
    for (const auto& t : a.transitions) {
      Trans tr;
      tr.src = static_cast<std::uint32_t>(*a.location_index(t.src));
      tr.tgt = static_cast<std::uint32_t>(*a.location_index(t.tgt));
      tr.port = *a.port_index(t.port);
      if (t.guard) tr.guard = resolve_expr(t.guard, scope, sink, Type::Bool);
      tr.update = resolve_program(t.update, a.vars, sink);
      at.by_port_loc[tr.port][tr.src].push_back(at.transitions.size());
      at.transitions.push_back(std::move(tr));
    }
    ix.atomics.push_back(std::move(at));
  }
  ix.var_total = offset;
  for (const auto& c : m.connectors) {
    Conn cn;
    auto add = [&](const Endpoint& e) {
      std::size_t ai = *m.atomic_index(e.component);
      cn.ends.emplace_back(ai, *m.atomics[ai].port_index(e.port));
    };
    add(c.sender);
    for (const auto& r : c.receivers) add(r);
    ix.connectors.push_back(std::move(cn));
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [lo, hi] : m.priority) pairs.emplace_back(*m.connector_index(lo), *m.connector_index(hi));
  ix.higher = closure(m.connectors.size(), pairs);
  ix.has_higher.assign(m.connectors.size(), false);
  for (std::size_t c = 0; c < m.connectors.size(); ++c) {
    ix.has_higher[c] = std::any_of(ix.higher[c].begin(), ix.higher[c].end(), [](bool b) { return b; });
  }
  return ix;
}

BipState initial_state(const IndexedBip& ix) {
  BipState s;
  const auto& m = *ix.model;
  for (const auto& a : m.atomics) {
    s.loc.push_back(static_cast<std::uint32_t>(a.location_index(a.initial).value_or(0)));
    for (const auto& v : a.vars) s.vars.push_back(v.init);
  }
  return s;
}

}  // namespace sfcbip
