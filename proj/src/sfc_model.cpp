#include "sfcbip/sfc_model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace sfcbip {

const char* qualifier_name(Qualifier q) {
  switch (q) {
    case Qualifier::N: return "N";
    case Qualifier::S: return "S";
    case Qualifier::R: return "R";
    case Qualifier::P0: return "P0";
    case Qualifier::P1: return "P1";
  }
  return "?";
}

namespace {

template <class T>
std::optional<std::size_t> find_named(const std::vector<T>& items, std::string_view name) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].name == name) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> SfcModel::step_index(std::string_view n) const { return find_named(steps, n); }
std::optional<std::size_t> SfcModel::action_index(std::string_view n) const { return find_named(actions, n); }
std::optional<std::size_t> SfcModel::var_index(std::string_view n) const { return find_named(vars, n); }
std::optional<std::size_t> SfcModel::transition_index(std::string_view n) const {
  return find_named(transitions, n);
}

std::vector<std::size_t> SfcModel::steps_of_action(std::size_t action) const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    for (const auto& b : steps[s].blocks) {
      if (b.action == actions[action].name) {
        out.push_back(s);
        break;
      }
    }
  }
  return out;
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
  for (Value v : c.f.values) mix(static_cast<std::size_t>(v));
  mix(0xabcdef);
  for (bool b : c.active_steps) mix(b);
  mix(0x123457);
  for (bool b : c.active_actions) mix(b);
  return h;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct SfcParser {
  TokenCursor cur;
  Dialect dialect;
  Diagnostics pending;  // literal type errors found while parsing

  std::vector<std::string> step_list() {
    std::vector<std::string> out;
    if (cur.accept(Tok::LParen)) {
      out.push_back(cur.expect_ident("in step list"));
      while (cur.accept(Tok::Comma)) out.push_back(cur.expect_ident("in step list"));
      cur.expect(Tok::RParen, "to close step list");
    } else {
      out.push_back(cur.expect_ident("as step"));
    }
    return out;
  }

  SfcModel parse() {
    SfcModel m;
    m.dialect = dialect;
    cur.expect_keyword("sfc");
    m.name = cur.expect_ident("as model name");
    cur.expect(Tok::LBrace, "to open model");
    while (!cur.at(Tok::RBrace)) {
      if (cur.at(Tok::End)) cur.fail("unterminated model, expected '}'");
      if (cur.accept_keyword("var")) {
        m.vars.push_back(parse_var_decl(cur, pending));
      } else if (cur.accept_keyword("action")) {
        ActionDef a;
        a.pos = cur.peek().pos;
        a.name = cur.expect_ident("as action name");
        cur.expect(Tok::LBrace, "to open action body");
        a.body = parse_program_body(cur);
        cur.expect(Tok::RBrace, "to close action body");
        m.actions.push_back(std::move(a));
      } else if (cur.accept_keyword("step")) {
        SfcStep s;
        s.pos = cur.peek().pos;
        s.name = cur.expect_ident("as step name");
        if (cur.accept_keyword("init")) m.initial.push_back(s.name);
        cur.expect(Tok::LBrace, "to open step");
        while (!cur.at(Tok::RBrace)) {
          if (cur.at_keyword("sfc")) {
            cur.fail("nested SFC references in action blocks are not supported");
          }
          ActionBlock b;
          b.pos = cur.peek().pos;
          b.action = cur.expect_ident("as action reference");
          if (cur.accept(Tok::At)) {
            std::string q = cur.expect_ident("as qualifier");
            if (q == "N") b.qualifier = Qualifier::N;
            else if (q == "S") b.qualifier = Qualifier::S;
            else if (q == "R") b.qualifier = Qualifier::R;
            else if (q == "P0") b.qualifier = Qualifier::P0;
            else if (q == "P1") b.qualifier = Qualifier::P1;
            else throw SyntaxError("unknown qualifier '" + q + "' (expected N, S, R, P0 or P1)", b.pos);
          }
          cur.expect(Tok::Semi, "after action block");
          s.blocks.push_back(std::move(b));
        }
        cur.expect(Tok::RBrace, "to close step");
        m.steps.push_back(std::move(s));
      } else if (cur.accept_keyword("transition")) {
        SfcTransition t;
        t.pos = cur.peek().pos;
        t.name = cur.expect_ident("as transition name");
        cur.expect(Tok::Colon, "after transition name");
        t.src = step_list();
        cur.expect(Tok::Arrow, "between source and target steps");
        t.tgt = step_list();
        cur.expect_keyword("when");
        t.guard = parse_expr(cur);
        cur.expect(Tok::Semi, "after transition");
        m.transitions.push_back(std::move(t));
      } else if (cur.accept_keyword("order")) {
        if (!m.action_order.empty()) cur.fail("duplicate 'order' declaration");
        m.action_order.push_back(cur.expect_ident("in action order"));
        while (cur.accept(Tok::Lt)) m.action_order.push_back(cur.expect_ident("in action order"));
        cur.expect(Tok::Semi, "after action order");
      } else if (cur.accept_keyword("priority")) {
        std::vector<std::string> chain{cur.expect_ident("in priority")};
        while (cur.accept(Tok::Gt)) chain.push_back(cur.expect_ident("in priority"));
        cur.expect(Tok::Semi, "after priority");
        if (chain.size() < 2) cur.fail("priority needs at least two transitions");
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) m.priority.emplace_back(chain[i + 1], chain[i]);
      } else {
        cur.fail("expected declaration (var, action, step, transition, order, priority), found '" +
                 cur.peek().text + "'");
      }
    }
    cur.expect(Tok::RBrace, "to close model");
    if (!cur.at(Tok::End)) cur.fail("unexpected '" + cur.peek().text + "' after model");
    return m;
  }
};

}  // namespace

SfcModel parse_sfc_syntax(std::string_view text, Dialect dialect) {
  SfcParser p{TokenCursor(tokenize(text)), dialect, {}};
  return p.parse();
}

SfcParseResult parse_sfc(std::string_view text, Dialect dialect) {
  SfcParseResult r;
  try {
    SfcParser p{TokenCursor(tokenize(text)), dialect, {}};
    SfcModel m = p.parse();
    r.diags = std::move(p.pending);
    Diagnostics v = validate(m);
    r.diags.insert(r.diags.end(), v.begin(), v.end());
    r.model = std::move(m);
  } catch (const SyntaxError& e) {
    r.diags.push_back(e.diagnostic());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

template <class T>
void check_unique(const std::vector<T>& items, const char* what, Diagnostics& diags) {
  std::set<std::string> seen;
  for (const auto& it : items) {
    if (!seen.insert(it.name).second) {
      diags.push_back({"duplicate-name", std::string("duplicate ") + what + " '" + it.name + "'", it.pos});
    }
  }
}

/// Transitive closure of a strict order given as (lower, higher) index pairs.
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

Diagnostics validate(const SfcModel& m) {
  Diagnostics diags;
  {
    std::set<std::string> seen;
    for (const auto& v : m.vars) {
      if (!seen.insert(v.name).second) diags.push_back({"duplicate-name", "duplicate variable '" + v.name + "'", {}});
      if (v.lo > v.hi) diags.push_back({"empty-range", "variable '" + v.name + "' has an empty range", {}});
      else if (!v.admits(v.init))
        diags.push_back({"init-range", "initial value of '" + v.name + "' outside its range", {}});
    }
  }
  check_unique(m.actions, "action", diags);
  check_unique(m.steps, "step", diags);
  check_unique(m.transitions, "transition", diags);

  for (const auto& a : m.actions) {
    Diagnostics d = typecheck(a.body, m.vars);
    for (auto& x : d) x.message = "action '" + a.name + "': " + x.message;
    diags.insert(diags.end(), d.begin(), d.end());
  }

  for (const auto& s : m.steps) {
    std::set<std::string> used;
    for (const auto& b : s.blocks) {
      if (!m.action_index(b.action)) {
        diags.push_back({"unknown-action",
                         "step '" + s.name + "' references unknown action '" + b.action +
                             "' (nested SFC references are not supported)",
                         b.pos});
      }
      if (!used.insert(b.action).second) {
        diags.push_back({"duplicate-block", "step '" + s.name + "' references action '" + b.action + "' twice", b.pos});
      }
      if (m.dialect == Dialect::non_extended && b.qualifier != Qualifier::N) {
        diags.push_back({"extended-feature",
                         std::string("qualifier ") + qualifier_name(b.qualifier) + " on '" + b.action + "' in step '" +
                             s.name + "': only N qualifier is supported in non-extended SFCs",
                         b.pos});
      }
    }
  }

  if (m.initial.empty()) diags.push_back({"empty-initial", "no initial step declared", {}});
  for (const auto& i : m.initial) {
    if (!m.step_index(i)) diags.push_back({"unknown-step", "unknown initial step '" + i + "'", {}});
  }

  for (const auto& t : m.transitions) {
    if (t.src.empty() || t.tgt.empty())
      diags.push_back({"empty-step-set", "transition '" + t.name + "' needs nonempty source and target", t.pos});
    for (const auto* side : {&t.src, &t.tgt}) {
      std::set<std::string> seen;
      for (const auto& s : *side) {
        if (!m.step_index(s))
          diags.push_back({"unknown-step", "transition '" + t.name + "' references unknown step '" + s + "'", t.pos});
        if (!seen.insert(s).second)
          diags.push_back({"duplicate-step", "transition '" + t.name + "' lists step '" + s + "' twice", t.pos});
      }
    }
    Diagnostics d;
    resolve_expr(t.guard, scope_of(m.vars), d, Type::Bool);
    for (auto& x : d) x.message = "guard of '" + t.name + "': " + x.message;
    diags.insert(diags.end(), d.begin(), d.end());
  }

  {
    std::map<std::string, int> count;
    for (const auto& a : m.action_order) {
      if (!m.action_index(a)) diags.push_back({"unknown-action", "action order names unknown action '" + a + "'", {}});
      ++count[a];
    }
    for (const auto& [name, c] : count) {
      if (c > 1) diags.push_back({"order-duplicate", "action '" + name + "' appears twice in the action order", {}});
    }
    for (const auto& a : m.actions) {
      if (!count.count(a.name)) {
        diags.push_back({"order-incomplete", "total order incomplete: action '" + a.name + "' is not ordered", a.pos});
      }
    }
  }

  {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    bool ok = true;
    for (const auto& [lo, hi] : m.priority) {
      auto l = m.transition_index(lo);
      auto h = m.transition_index(hi);
      if (!l) diags.push_back({"unknown-transition", "priority names unknown transition '" + lo + "'", {}});
      if (!h) diags.push_back({"unknown-transition", "priority names unknown transition '" + hi + "'", {}});
      if (!l || !h) {
        ok = false;
        continue;
      }
      if (*l == *h) {
        diags.push_back({"priority-reflexive", "transition '" + lo + "' cannot have priority over itself", {}});
        ok = false;
        continue;
      }
      pairs.emplace_back(*l, *h);
    }
    if (ok) {
      auto hi = closure(m.transitions.size(), pairs);
      for (std::size_t i = 0; i < hi.size(); ++i) {
        if (hi[i][i]) {
          diags.push_back({"priority-cycle",
                           "transition priority is not acyclic (cycle through '" + m.transitions[i].name + "')", {}});
          break;
        }
      }
    }
  }
  return diags;
}

IndexedSfc IndexedSfc::build(const SfcModel& m) {
  IndexedSfc ix;
  ix.model = &m;
  Diagnostics sink;
  for (const auto& a : m.actions) ix.bodies.push_back(resolve_program(a.body, m.vars, sink));
  for (const auto& s : m.steps) {
    std::vector<std::size_t> acts;
    for (const auto& b : s.blocks) {
      if (auto a = m.action_index(b.action)) {
        if (std::find(acts.begin(), acts.end(), *a) == acts.end()) acts.push_back(*a);
      }
    }
    std::sort(acts.begin(), acts.end());
    ix.step_actions.push_back(std::move(acts));
  }
  Scope scope = scope_of(m.vars);
  for (const auto& t : m.transitions) {
    Trans tr;
    for (const auto& s : t.src) tr.src.push_back(*m.step_index(s));
    for (const auto& s : t.tgt) tr.tgt.push_back(*m.step_index(s));
    tr.guard = resolve_expr(t.guard, scope, sink, Type::Bool);
    ix.transitions.push_back(std::move(tr));
  }
  ix.order_rank.assign(m.actions.size(), 0);
  for (std::size_t r = 0; r < m.action_order.size(); ++r) {
    if (auto a = m.action_index(m.action_order[r])) {
      ix.order_rank[*a] = r;
      ix.by_rank.push_back(*a);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [lo, hi] : m.priority) pairs.emplace_back(*m.transition_index(lo), *m.transition_index(hi));
  ix.higher = closure(m.transitions.size(), pairs);
  return ix;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize(const SfcModel& m) {
  std::ostringstream os;
  os << "sfc " << m.name << " {\n";
  for (const auto& v : m.vars) {
    os << "  var " << v.name << " : " << format_decl_type(v) << " = " << format_value(v, v.init) << ";\n";
  }
  for (const auto& a : m.actions) {
    os << "  action " << a.name << " {";
    if (a.body.empty()) {
      os << " }\n";
    } else {
      os << " " << to_string(a.body) << " }\n";
    }
  }
  std::set<std::string> init(m.initial.begin(), m.initial.end());
  for (const auto& s : m.steps) {
    os << "  step " << s.name << (init.count(s.name) ? " init" : "") << " {";
    for (const auto& b : s.blocks) {
      os << " " << b.action;
      if (b.qualifier != Qualifier::N) os << "@" << qualifier_name(b.qualifier);
      os << ";";
    }
    os << (s.blocks.empty() ? "}\n" : " }\n");
  }
  auto list = [](const std::vector<std::string>& xs) {
    if (xs.size() == 1) return xs[0];
    std::string out = "(";
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
    return out + ")";
  };
  for (const auto& t : m.transitions) {
    os << "  transition " << t.name << " : " << list(t.src) << " -> " << list(t.tgt) << " when "
       << to_string(*t.guard) << ";\n";
  }
  if (!m.action_order.empty()) {
    os << "  order ";
    for (std::size_t i = 0; i < m.action_order.size(); ++i) os << (i ? " < " : "") << m.action_order[i];
    os << ";\n";
  }
  for (const auto& [lo, hi] : m.priority) os << "  priority " << hi << " > " << lo << ";\n";
  os << "}\n";
  return os.str();
}

bool structurally_equal(const SfcModel& a, const SfcModel& b) {
  if (a.name != b.name || a.vars != b.vars || a.initial != b.initial || a.action_order != b.action_order ||
      a.priority != b.priority || a.actions.size() != b.actions.size() || a.steps.size() != b.steps.size() ||
      a.transitions.size() != b.transitions.size())
    return false;
  for (std::size_t i = 0; i < a.actions.size(); ++i) {
    const auto& x = a.actions[i];
    const auto& y = b.actions[i];
    if (x.name != y.name || x.body.size() != y.body.size()) return false;
    for (std::size_t k = 0; k < x.body.size(); ++k) {
      if (x.body[k].target != y.body[k].target || !structurally_equal(*x.body[k].value, *y.body[k].value))
        return false;
    }
  }
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const auto& x = a.steps[i];
    const auto& y = b.steps[i];
    if (x.name != y.name || x.blocks.size() != y.blocks.size()) return false;
    for (std::size_t k = 0; k < x.blocks.size(); ++k) {
      if (x.blocks[k].action != y.blocks[k].action || x.blocks[k].qualifier != y.blocks[k].qualifier) return false;
    }
  }
  for (std::size_t i = 0; i < a.transitions.size(); ++i) {
    const auto& x = a.transitions[i];
    const auto& y = b.transitions[i];
    if (x.name != y.name || x.src != y.src || x.tgt != y.tgt || !structurally_equal(*x.guard, *y.guard)) return false;
  }
  return true;
}

Configuration initial_config(const SfcModel& m) {
  Configuration c;
  c.f = Valuation::initial(m.vars);
  c.active_steps.assign(m.steps.size(), false);
  c.active_actions.assign(m.actions.size(), false);
  for (const auto& s : m.initial) {
    if (auto i = m.step_index(s)) c.active_steps[*i] = true;
  }
  return c;
}

}  // namespace sfcbip
