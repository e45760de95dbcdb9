#include "sfcbip/bip_exec.hpp"

#include <algorithm>
#include <deque>
#include <span>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace sfcbip {

namespace {

std::span<const Value> local(const IndexedBip& ix, const BipState& s, std::size_t a) {
  const auto& at = ix.atomics[a];
  return std::span<const Value>(s.vars).subspan(at.var_offset, at.var_count);
}

bool guard_true(const IndexedBip::Trans& t, std::span<const Value> vals) {
  return !t.guard || eval_bool(*t.guard, vals);
}

}  // namespace

std::vector<Interaction> raw_interactions(const IndexedBip& ix, const BipState& s) {
  std::vector<Interaction> out;
  if (s.error) return out;
  std::vector<std::vector<std::size_t>> options;
  for (std::size_t c = 0; c < ix.connectors.size(); ++c) {
    const auto& conn = ix.connectors[c];
    options.assign(conn.ends.size(), {});
    bool ok = true;
    for (std::size_t k = 0; k < conn.ends.size() && ok; ++k) {
      auto [a, p] = conn.ends[k];
      const auto& at = ix.atomics[a];
      auto vals = local(ix, s, a);
      for (std::size_t t : at.by_port_loc[p][s.loc[a]]) {
        if (guard_true(at.transitions[t], vals)) options[k].push_back(t);
      }
      ok = !options[k].empty();
    }
    if (!ok) continue;
    // cartesian product, first endpoint most significant
    std::vector<std::size_t> idx(conn.ends.size(), 0);
    while (true) {
      Interaction i;
      i.connector = c;
      for (std::size_t k = 0; k < idx.size(); ++k) i.chosen.push_back(options[k][idx[k]]);
      out.push_back(std::move(i));
      std::size_t k = idx.size();
      while (k > 0 && ++idx[k - 1] == options[k - 1].size()) idx[--k] = 0;
      if (k == 0) break;
    }
  }
  return out;
}

std::vector<Interaction> enabled_interactions(const IndexedBip& ix, const BipState& s, const BipOptions& opt) {
  auto raw = raw_interactions(ix, s);
  if (!opt.priority) return raw;
  std::vector<bool> live(ix.connectors.size(), false);
  for (const auto& i : raw) live[i.connector] = true;
  std::vector<Interaction> out;
  for (auto& i : raw) {
    bool beaten = false;
    if (ix.has_higher[i.connector]) {
      for (std::size_t d = 0; d < live.size() && !beaten; ++d) beaten = live[d] && ix.higher[i.connector][d];
    }
    if (!beaten) out.push_back(std::move(i));
  }
  return out;
}

ApplyResult apply_interaction(const IndexedBip& ix, const BipState& s, const Interaction& i, const BipOptions& opt) {
  ApplyResult r;
  r.state = s;
  const auto& conn = ix.connectors[i.connector];
  const auto& m = *ix.model;
  auto fail = [&r](RangeViolation rv) {
    r.defect = std::move(rv);
    r.state = BipState{};
    r.state.error = true;
  };

  auto [sa, sp] = conn.ends[0];
  int sslot = ix.atomics[sa].port_slot[sp];
  if (sslot >= 0) r.transfer.value = s.vars[ix.atomics[sa].var_offset + sslot];

  auto transfer = [&]() -> bool {
    if (!r.transfer.value) return true;
    for (std::size_t k = 1; k < conn.ends.size(); ++k) {
      auto [a, p] = conn.ends[k];
      int slot = ix.atomics[a].port_slot[p];
      if (slot < 0) continue;
      const auto& decl = m.atomics[a].vars[slot];
      if (!decl.admits(*r.transfer.value)) {
        fail({m.atomics[a].name + "." + decl.name, *r.transfer.value, decl.lo, decl.hi});
        return false;
      }
      r.state.vars[ix.atomics[a].var_offset + slot] = *r.transfer.value;
    }
    return true;
  };

  if (!opt.transfer_after && !transfer()) return r;
  for (std::size_t k = 0; k < conn.ends.size(); ++k) {
    std::size_t a = conn.ends[k].first;
    const auto& at = ix.atomics[a];
    const auto& t = at.transitions[i.chosen[k]];
    std::span<Value> vals = std::span<Value>(r.state.vars).subspan(at.var_offset, at.var_count);
    if (auto rv = exec_in_place(t.update, vals)) {
      rv->variable = m.atomics[a].name + "." + rv->variable;
      fail(*rv);
      return r;
    }
    r.state.loc[a] = t.tgt;
  }
  if (opt.transfer_after && !transfer()) return r;
  return r;
}

StateGraph reachable_states(const IndexedBip& ix, const BipOptions& opt, const ExploreLimits& lim) {
  StateGraph g;
  std::unordered_map<BipState, std::size_t, BipStateHash> index;
  std::deque<std::size_t> queue;
  auto intern = [&](const BipState& s, std::size_t& id) {
    auto it = index.find(s);
    if (it != index.end()) {
      id = it->second;
      return true;
    }
    if (g.nodes.size() >= lim.max_states) return false;
    id = g.nodes.size();
    index.emplace(s, id);
    g.nodes.push_back(s);
    g.out.emplace_back();
    if (s.error) {
      g.error_node = id;
    } else {
      queue.push_back(id);
    }
    return true;
  };
  auto stop = [&](const char* why) {
    g.complete = false;
    g.limit = why;
    g.frontier = queue.size() + 1;
  };
  std::size_t id = 0;
  if (!intern(initial_state(ix), id)) {
    g.complete = false;
    g.limit = "max_states";
    g.frontier = 1;
    return g;
  }
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    BipState s = g.nodes[cur];
    for (const auto& i : enabled_interactions(ix, s, opt)) {
      auto r = apply_interaction(ix, s, i, opt);
      std::size_t to = 0;
      if (!intern(r.state, to)) {
        stop("max_states");
        return g;
      }
      if (g.edges.size() >= lim.max_edges) {
        stop("max_edges");
        return g;
      }
      g.out[cur].push_back(g.edges.size());
      g.edges.push_back({cur, to, i});
      if (r.defect) ++g.defect_edges;
    }
  }
  return g;
}

BipCheckResult check_bip_invariant(const StateGraph& g, const StatePredicate& inv) {
  BipCheckResult r;
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
    if (!g.nodes[n].error) {
      ++r.checked;
      if (!inv(g.nodes[n])) {
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

Value var_value(const IndexedBip& ix, const BipState& s, std::string_view component, std::string_view var) {
  auto a = ix.model->atomic_index(component);
  if (!a) throw std::out_of_range("unknown component '" + std::string(component) + "'");
  auto v = ix.model->atomics[*a].var_index(var);
  if (!v) throw std::out_of_range("unknown variable '" + std::string(component) + "." + std::string(var) + "'");
  return s.vars[ix.atomics[*a].var_offset + *v];
}

const std::string& location_name(const IndexedBip& ix, const BipState& s, std::size_t atomic) {
  return ix.model->atomics[atomic].locations[s.loc[atomic]];
}

std::string interaction_str(const IndexedBip& ix, const Interaction& i) {
  const auto& m = *ix.model;
  const auto& c = m.connectors[i.connector];
  std::string out = c.name + "[";
  const auto& ends = ix.connectors[i.connector].ends;
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const auto& a = m.atomics[ends[k].first];
    const auto& t = a.transitions[i.chosen[k]];
    if (k) out += ", ";
    out += a.name + ":" + t.src + "->" + t.tgt;
  }
  return out + "]";
}

std::string state_str(const IndexedBip& ix, const BipState& s) {
  if (s.error) return "ERROR";
  const auto& m = *ix.model;
  std::ostringstream os;
  for (std::size_t a = 0; a < m.atomics.size(); ++a) {
    const auto& at = m.atomics[a];
    if (a) os << " ";
    os << at.name << "@" << at.locations[s.loc[a]];
    if (!at.vars.empty()) {
      os << "{";
      for (std::size_t v = 0; v < at.vars.size(); ++v) {
        os << (v ? "," : "") << at.vars[v].name << "="
           << format_value(at.vars[v], s.vars[ix.atomics[a].var_offset + v]);
      }
      os << "}";
    }
  }
  return os.str();
}

nlohmann::ordered_json state_json(const IndexedBip& ix, const BipState& s) {
  if (s.error) return {{"error", true}};
  const auto& m = *ix.model;
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t a = 0; a < m.atomics.size(); ++a) {
    const auto& at = m.atomics[a];
    nlohmann::ordered_json c;
    c["loc"] = at.locations[s.loc[a]];
    if (!at.vars.empty()) {
      nlohmann::ordered_json vars = nlohmann::ordered_json::object();
      for (std::size_t v = 0; v < at.vars.size(); ++v) {
        Value x = s.vars[ix.atomics[a].var_offset + v];
        if (at.vars[v].type == Type::Bool) {
          vars[at.vars[v].name] = x != 0;
        } else {
          vars[at.vars[v].name] = x;
        }
      }
      c["vars"] = std::move(vars);
    }
    j[at.name] = std::move(c);
  }
  return j;
}

nlohmann::ordered_json interaction_json(const IndexedBip& ix, const Interaction& i, const TransferRecord* tr) {
  const auto& m = *ix.model;
  nlohmann::ordered_json j;
  j["connector"] = m.connectors[i.connector].name;
  auto parts = nlohmann::ordered_json::array();
  const auto& ends = ix.connectors[i.connector].ends;
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const auto& a = m.atomics[ends[k].first];
    const auto& t = a.transitions[i.chosen[k]];
    parts.push_back({{"component", a.name}, {"port", t.port}, {"from", t.src}, {"to", t.tgt}});
  }
  j["participants"] = std::move(parts);
  if (tr) {
    if (tr->value) {
      j["transfer"] = *tr->value;
    } else {
      j["transfer"] = nullptr;
    }
  }
  return j;
}

nlohmann::ordered_json graph_json(const IndexedBip& ix, const StateGraph& g) {
  nlohmann::ordered_json j;
  j["model"] = ix.model->name;
  j["complete"] = g.complete;
  if (!g.complete) {
    j["limit"] = g.limit;
    j["frontier"] = g.frontier;
  }
  j["node_count"] = g.nodes.size();
  j["edge_count"] = g.edges.size();
  j["defect_edges"] = g.defect_edges;
  auto nodes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) nodes.push_back({{"id", i}, {"state", state_json(ix, g.nodes[i])}});
  j["nodes"] = std::move(nodes);
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"connector", ix.model->connectors[e.label.connector].name}});
  }
  j["edges"] = std::move(edges);
  return j;
}

std::string graph_dot(const IndexedBip& ix, const StateGraph& g) {
  std::ostringstream os;
  os << "digraph \"" << ix.model->name << "\" {\n  node [shape=box, fontname=monospace];\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    os << "  n" << i << " [label=\"" << state_str(ix, g.nodes[i]) << "\"";
    if (g.nodes[i].error) os << ", color=red";
    if (i == 0) os << ", penwidth=2";
    os << "];\n";
  }
  for (const auto& e : g.edges) {
    os << "  n" << e.from << " -> n" << e.to << " [label=\"" << ix.model->connectors[e.label.connector].name
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

nlohmann::ordered_json trace_json(const IndexedBip& ix, const BipState& start, const std::vector<Interaction>& steps,
                                  const BipOptions& opt) {
  auto arr = nlohmann::ordered_json::array();
  BipState s = start;
  for (const auto& i : steps) {
    auto r = apply_interaction(ix, s, i, opt);
    arr.push_back(interaction_json(ix, i, &r.transfer));
    s = r.state;
    if (s.error) break;
  }
  return arr;
}

}  // namespace sfcbip
