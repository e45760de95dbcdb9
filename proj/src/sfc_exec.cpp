#include "sfcbip/sfc_exec.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

namespace sfcbip {

const char* exec_mode_name(ExecMode m) {
  switch (m) {
    case ExecMode::literal: return "literal";
    case ExecMode::ordered: return "ordered";
    case ExecMode::phased: return "phased";
  }
  return "?";
}

std::optional<ExecMode> parse_exec_mode(std::string_view s) {
  if (s == "literal") return ExecMode::literal;
  if (s == "ordered") return ExecMode::ordered;
  if (s == "phased") return ExecMode::phased;
  return std::nullopt;
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::none: return "none";
    case Phase::exec: return "EXEC";
    case Phase::tran: return "TRAN";
    case Phase::act: return "ACT";
  }
  return "?";
}

const char* verdict_name(CheckVerdict v) {
  switch (v) {
    case CheckVerdict::holds: return "holds";
    case CheckVerdict::violated: return "violated";
    case CheckVerdict::incomplete: return "incomplete";
  }
  return "?";
}

std::string label_str(const MicroLabel& l, const SfcModel& m) {
  switch (l.kind) {
    case MicroKind::execute_action: return "executeAction(" + m.actions[l.action].name + ")";
    case MicroKind::step_transition: return "stepTransition(" + m.transitions[l.transition].name + ")";
    case MicroKind::activate_action:
      return "activateAction(" + m.steps[l.step].name + "," + m.actions[l.action].name + ")";
    case MicroKind::phase_move: return std::string("phase(") + phase_name(l.to_phase) + ")";
    case MicroKind::cycle: return "cycle";
  }
  return "?";
}

std::size_t SfcNodeHash::operator()(const SfcNode& n) const {
  std::size_t h = ConfigurationHash{}(n.c);
  auto mix = [&h](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
  mix(static_cast<std::size_t>(n.phase));
  for (bool b : n.pending) mix(b + 2);
  for (bool b : n.entered) mix(b + 5);
  mix(n.error);
  return h;
}

SfcNode initial_node(const IndexedSfc& ix, const ExecOptions& opt) {
  SfcNode n;
  n.c = initial_config(*ix.model);
  if (opt.mode == ExecMode::phased) {
    n.phase = Phase::exec;
    n.pending.assign(ix.transitions.size(), false);
    n.entered.assign(ix.model->steps.size(), false);
  }
  return n;
}

bool transition_enabled(const IndexedSfc& ix, const Configuration& c, std::size_t t) {
  const auto& tr = ix.transitions[t];
  for (std::size_t s : tr.src) {
    if (!c.active_steps[s]) return false;
  }
  return eval_bool(*tr.guard, c.f.values);
}

namespace {

bool conflicting(const IndexedSfc& ix, std::size_t t, std::size_t u) {
  for (std::size_t s : ix.transitions[t].src) {
    for (std::size_t r : ix.transitions[u].src) {
      if (s == r) return true;
    }
  }
  return false;
}

/// No enabled conflicting transition with strictly higher priority.
bool not_preempted(const IndexedSfc& ix, const std::vector<bool>& enabled, std::size_t t) {
  for (std::size_t u = 0; u < enabled.size(); ++u) {
    if (u != t && enabled[u] && ix.higher[t][u] && conflicting(ix, t, u)) return false;
  }
  return true;
}

std::vector<bool> enabled_vector(const IndexedSfc& ix, const Configuration& c) {
  std::vector<bool> en(ix.transitions.size());
  for (std::size_t t = 0; t < en.size(); ++t) en[t] = transition_enabled(ix, c, t);
  return en;
}

void apply_transition(const IndexedSfc& ix, Configuration& c, std::size_t t) {
  for (std::size_t s : ix.transitions[t].src) c.active_steps[s] = false;
  for (std::size_t s : ix.transitions[t].tgt) c.active_steps[s] = true;
}

}  // namespace

std::vector<bool> enabled_set(const IndexedSfc& ix, const Configuration& c, bool priority) {
  std::vector<bool> en = enabled_vector(ix, c);
  std::vector<bool> out(en.size(), false);
  for (std::size_t t = 0; t < en.size(); ++t) {
    if (!en[t]) continue;
    bool take = true;
    for (std::size_t u = 0; u < en.size() && take; ++u) {
      if (u == t || !en[u] || !conflicting(ix, t, u)) continue;
      // a conflicting enabled transition must have lower priority
      if (!priority || !ix.higher[u][t]) take = false;
    }
    out[t] = take;
  }
  return out;
}

namespace {

void push_execute(const IndexedSfc& ix, const SfcNode& n, std::size_t a, std::vector<MicroStep>& out) {
  MicroStep st;
  st.label.kind = MicroKind::execute_action;
  st.label.action = a;
  st.target = n;
  if (auto rv = exec_in_place(ix.bodies[a], st.target.c.f.values)) {
    st.defect = *rv;
    st.target = SfcNode{};
    st.target.error = true;
  } else {
    st.target.c.active_actions[a] = false;
  }
  out.push_back(std::move(st));
}

void push_activations(const IndexedSfc& ix, const SfcNode& n, std::vector<MicroStep>& out) {
  const auto& c = n.c;
  for (std::size_t s = 0; s < c.active_steps.size(); ++s) {
    if (!c.active_steps[s]) continue;
    for (std::size_t a : ix.step_actions[s]) {
      if (c.active_actions[a]) continue;
      MicroStep st;
      st.label.kind = MicroKind::activate_action;
      st.label.step = s;
      st.label.action = a;
      st.target = n;
      st.target.c.active_actions[a] = true;
      out.push_back(std::move(st));
    }
  }
}

MicroStep phase_move(const SfcNode& n, Phase to) {
  MicroStep st;
  st.label.kind = MicroKind::phase_move;
  st.label.to_phase = to;
  st.target = n;
  st.target.phase = to;
  return st;
}

void phased_successors(const IndexedSfc& ix, const SfcNode& n, const ExecOptions& opt, std::vector<MicroStep>& out) {
  const auto& c = n.c;
  switch (n.phase) {
    case Phase::exec: {
      for (std::size_t a : ix.by_rank) {
        if (c.active_actions[a]) {
          push_execute(ix, n, a, out);
          return;
        }
      }
      MicroStep st = phase_move(n, Phase::tran);
      st.target.pending = enabled_set(ix, c, opt.priority);
      std::fill(st.target.entered.begin(), st.target.entered.end(), false);
      out.push_back(std::move(st));
      return;
    }
    case Phase::tran: {
      for (std::size_t t = 0; t < n.pending.size(); ++t) {
        if (!n.pending[t]) continue;
        const auto& tr = ix.transitions[t];
        bool ok = true;
        for (std::size_t s : tr.src) ok = ok && c.active_steps[s] && !n.entered[s];
        for (std::size_t s : tr.tgt) ok = ok && !c.active_steps[s];
        if (!ok) continue;
        MicroStep st;
        st.label.kind = MicroKind::step_transition;
        st.label.transition = t;
        st.target = n;
        apply_transition(ix, st.target.c, t);
        st.target.pending[t] = false;
        for (std::size_t s : tr.tgt) st.target.entered[s] = true;
        out.push_back(std::move(st));
      }
      if (out.empty()) {
        MicroStep st = phase_move(n, Phase::act);
        std::fill(st.target.pending.begin(), st.target.pending.end(), false);
        std::fill(st.target.entered.begin(), st.target.entered.end(), false);
        out.push_back(std::move(st));
      }
      return;
    }
    case Phase::act: {
      push_activations(ix, n, out);
      if (out.empty()) out.push_back(phase_move(n, Phase::exec));
      return;
    }
    case Phase::none: return;
  }
}

}  // namespace

std::vector<MicroStep> micro_successors(const IndexedSfc& ix, const SfcNode& n, const ExecOptions& opt) {
  std::vector<MicroStep> out;
  if (n.error) return out;
  if (opt.mode == ExecMode::phased) {
    phased_successors(ix, n, opt, out);
    return out;
  }
  const auto& c = n.c;
  if (opt.mode == ExecMode::ordered) {
    for (std::size_t a : ix.by_rank) {
      if (c.active_actions[a]) {
        push_execute(ix, n, a, out);
        break;
      }
    }
  } else {
    for (std::size_t a = 0; a < c.active_actions.size(); ++a) {
      if (c.active_actions[a]) push_execute(ix, n, a, out);
    }
  }
  std::vector<bool> en = enabled_vector(ix, c);
  for (std::size_t t = 0; t < en.size(); ++t) {
    if (!en[t]) continue;
    if (opt.priority && !not_preempted(ix, en, t)) continue;
    MicroStep st;
    st.label.kind = MicroKind::step_transition;
    st.label.transition = t;
    st.target = n;
    apply_transition(ix, st.target.c, t);
    out.push_back(std::move(st));
  }
  push_activations(ix, n, out);
  return out;
}

namespace {

struct GraphBuilder {
  ConfigGraph g;
  std::unordered_map<SfcNode, std::size_t, SfcNodeHash> index;
  std::deque<std::size_t> queue;
  const ExploreLimits& lim;

  explicit GraphBuilder(const ExploreLimits& l) : lim(l) {}

  /// Returns false when the state limit is hit.
  bool intern(const SfcNode& n, bool observed, std::size_t& id) {
    auto it = index.find(n);
    if (it != index.end()) {
      id = it->second;
      if (observed && !n.error) g.observed[id] = true;
      return true;
    }
    if (g.nodes.size() >= lim.max_states) return false;
    id = g.nodes.size();
    index.emplace(n, id);
    g.nodes.push_back(n);
    g.out.emplace_back();
    g.observed.push_back(observed && !n.error);
    if (n.error) {
      g.error_node = id;
    } else {
      queue.push_back(id);
    }
    return true;
  }

  bool add_edge(std::size_t from, std::size_t to, const MicroLabel& l) {
    if (g.edges.size() >= lim.max_edges) return false;
    g.out[from].push_back(g.edges.size());
    g.edges.push_back({from, to, l});
    return true;
  }

  void stop(const char* why, std::size_t remaining) {
    g.complete = false;
    g.limit = why;
    g.frontier = remaining;
  }
};

void sort_successors(std::vector<MicroStep>& succ) {
  std::sort(succ.begin(), succ.end(), [](const MicroStep& a, const MicroStep& b) {
    if (a.label != b.label) return a.label < b.label;
    return a.target < b.target;
  });
}

}  // namespace

ConfigGraph reachable_configs(const IndexedSfc& ix, const ExecOptions& opt, const ExploreLimits& lim) {
  GraphBuilder b(lim);
  std::size_t id = 0;
  if (!b.intern(initial_node(ix, opt), true, id)) {
    b.stop("max_states", 1);
    return std::move(b.g);
  }
  while (!b.queue.empty()) {
    std::size_t cur = b.queue.front();
    b.queue.pop_front();
    SfcNode node = b.g.nodes[cur];
    auto succ = micro_successors(ix, node, opt);
    sort_successors(succ);
    for (const auto& st : succ) {
      std::size_t to = 0;
      if (!b.intern(st.target, true, to)) {
        b.stop("max_states", b.queue.size() + 1);
        return std::move(b.g);
      }
      if (!b.add_edge(cur, to, st.label)) {
        b.stop("max_edges", b.queue.size() + 1);
        return std::move(b.g);
      }
      if (st.defect) ++b.g.defect_edges;
    }
  }
  return std::move(b.g);
}

std::variant<Configuration, RangeViolation> run_cycle(const IndexedSfc& ix, const Configuration& c, bool priority) {
  Configuration n = c;
  for (std::size_t a : ix.by_rank) {
    if (!n.active_actions[a]) continue;
    if (auto rv = exec_in_place(ix.bodies[a], n.f.values)) return *rv;
    n.active_actions[a] = false;
  }
  std::vector<bool> taken = enabled_set(ix, n, priority);
  std::vector<bool> steps = n.active_steps;
  for (std::size_t t = 0; t < taken.size(); ++t) {
    if (!taken[t]) continue;
    for (std::size_t s : ix.transitions[t].src) steps[s] = false;
  }
  for (std::size_t t = 0; t < taken.size(); ++t) {
    if (!taken[t]) continue;
    for (std::size_t s : ix.transitions[t].tgt) steps[s] = true;
  }
  n.active_steps = std::move(steps);
  std::fill(n.active_actions.begin(), n.active_actions.end(), false);
  for (std::size_t s = 0; s < n.active_steps.size(); ++s) {
    if (!n.active_steps[s]) continue;
    for (std::size_t a : ix.step_actions[s]) n.active_actions[a] = true;
  }
  return n;
}

ConfigGraph cycle_graph(const IndexedSfc& ix, const ExploreLimits& lim, bool priority) {
  GraphBuilder b(lim);
  std::size_t id = 0;
  SfcNode start;
  start.c = initial_config(*ix.model);
  if (!b.intern(start, false, id)) {
    b.stop("max_states", 1);
    return std::move(b.g);
  }
  MicroLabel cyc;
  cyc.kind = MicroKind::cycle;
  while (!b.queue.empty()) {
    std::size_t cur = b.queue.front();
    b.queue.pop_front();
    auto r = run_cycle(ix, b.g.nodes[cur].c, priority);
    SfcNode next;
    if (std::holds_alternative<Configuration>(r)) {
      next.c = std::get<Configuration>(r);
    } else {
      next.error = true;
      ++b.g.defect_edges;
    }
    std::size_t to = 0;
    if (!b.intern(next, true, to)) {
      b.stop("max_states", b.queue.size() + 1);
      break;
    }
    if (!b.add_edge(cur, to, cyc)) {
      b.stop("max_edges", b.queue.size() + 1);
      break;
    }
  }
  return std::move(b.g);
}

SfcCheckResult check_sfc_invariant(const ConfigGraph& g, const ConfigPredicate& inv) {
  SfcCheckResult r;
  if (!g.complete) {
    r.verdict = CheckVerdict::incomplete;
    return r;
  }
  if (g.nodes.empty()) return r;
  std::vector<std::size_t> parent_edge(g.nodes.size(), SIZE_MAX);
  std::vector<bool> seen(g.nodes.size(), false);
  std::deque<std::size_t> q{0};
  seen[0] = true;
  while (!q.empty()) {
    std::size_t n = q.front();
    q.pop_front();
    if (g.observed[n]) {
      ++r.checked;
      if (!inv(g.nodes[n].c)) {
        r.verdict = CheckVerdict::violated;
        for (std::size_t cur = n; cur != 0;) {
          std::size_t e = parent_edge[cur];
          r.edge_path.push_back(e);
          cur = g.edges[e].from;
        }
        std::reverse(r.edge_path.begin(), r.edge_path.end());
        r.path.push_back(0);
        for (std::size_t e : r.edge_path) r.path.push_back(g.edges[e].to);
        return r;
      }
    }
    for (std::size_t e : g.out[n]) {
      std::size_t to = g.edges[e].to;
      if (seen[to]) continue;
      seen[to] = true;
      parent_edge[to] = e;
      q.push_back(to);
    }
  }
  return r;
}

namespace {

std::vector<std::string> sorted_names(const std::vector<bool>& bits, const auto& items) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out.push_back(items[i].name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

nlohmann::ordered_json config_json(const SfcModel& m, const Configuration& c) {
  std::map<std::string, nlohmann::ordered_json> vals;
  for (std::size_t i = 0; i < m.vars.size(); ++i) {
    const auto& d = m.vars[i];
    if (d.type == Type::Bool) {
      vals[d.name] = c.f.values[i] != 0;
    } else {
      vals[d.name] = c.f.values[i];
    }
  }
  nlohmann::ordered_json f = nlohmann::ordered_json::object();
  for (auto& [k, v] : vals) f[k] = v;
  nlohmann::ordered_json j;
  j["f"] = f;
  j["activeS"] = sorted_names(c.active_steps, m.steps);
  j["activeA"] = sorted_names(c.active_actions, m.actions);
  return j;
}

nlohmann::ordered_json node_json(const SfcModel& m, const SfcNode& n) {
  if (n.error) return {{"error", true}};
  nlohmann::ordered_json j = config_json(m, n.c);
  if (n.phase != Phase::none) {
    j["phase"] = phase_name(n.phase);
    std::vector<std::string> pend;
    for (std::size_t t = 0; t < n.pending.size(); ++t) {
      if (n.pending[t]) pend.push_back(m.transitions[t].name);
    }
    std::sort(pend.begin(), pend.end());
    j["pending"] = pend;
    j["entered"] = sorted_names(n.entered, m.steps);
  }
  return j;
}

std::string config_str(const SfcModel& m, const Configuration& c) {
  std::map<std::string, std::string> vals;
  for (std::size_t i = 0; i < m.vars.size(); ++i) vals[m.vars[i].name] = format_value(m.vars[i], c.f.values[i]);
  std::ostringstream os;
  os << "({";
  bool first = true;
  for (auto& [k, v] : vals) {
    os << (first ? "" : ",") << k << "=" << v;
    first = false;
  }
  os << "}, {";
  first = true;
  for (auto& s : sorted_names(c.active_steps, m.steps)) {
    os << (first ? "" : ",") << s;
    first = false;
  }
  os << "}, {";
  first = true;
  for (auto& a : sorted_names(c.active_actions, m.actions)) {
    os << (first ? "" : ",") << a;
    first = false;
  }
  os << "})";
  return os.str();
}

nlohmann::ordered_json graph_json(const SfcModel& m, const ConfigGraph& g) {
  nlohmann::ordered_json j;
  j["model"] = m.name;
  j["complete"] = g.complete;
  if (!g.complete) {
    j["limit"] = g.limit;
    j["frontier"] = g.frontier;
  }
  j["node_count"] = g.nodes.size();
  j["edge_count"] = g.edges.size();
  j["defect_edges"] = g.defect_edges;
  auto nodes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    nlohmann::ordered_json n;
    n["id"] = i;
    n["config"] = node_json(m, g.nodes[i]);
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"label", label_str(e.label, m)}});
  j["edges"] = std::move(edges);
  return j;
}

std::string graph_dot(const SfcModel& m, const ConfigGraph& g) {
  std::ostringstream os;
  os << "digraph \"" << m.name << "\" {\n  node [shape=box, fontname=monospace];\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    os << "  n" << i << " [label=\"";
    if (n.error) {
      os << "ERROR\", color=red";
    } else {
      os << config_str(m, n.c);
      if (n.phase != Phase::none) os << "\\n" << phase_name(n.phase);
      os << "\"";
      if (i == 0) os << ", penwidth=2";
    }
    os << "];\n";
  }
  for (const auto& e : g.edges) {
    os << "  n" << e.from << " -> n" << e.to << " [label=\"" << label_str(e.label, m) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace sfcbip
