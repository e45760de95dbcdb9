#include "sfcbip/simcheck.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <unordered_map>

namespace sfcbip {

const char* rule3_name(Rule3 r) { return r == Rule3::pending ? "pending" : "committed"; }

std::optional<Rule3> parse_rule3(std::string_view s) {
  if (s == "pending") return Rule3::pending;
  if (s == "committed") return Rule3::committed;
  return std::nullopt;
}

const char* sim_verdict_name(SimVerdict v) {
  switch (v) {
    case SimVerdict::holds: return "holds";
    case SimVerdict::fails: return "fails";
    case SimVerdict::exhausted: return "exhausted";
  }
  return "?";
}

namespace {

std::size_t offset_of(const ComposedModel& b, std::size_t atomic) {
  std::size_t off = 0;
  for (std::size_t i = 0; i < atomic; ++i) off += b.atomics[i].vars.size();
  return off;
}

std::size_t need(std::optional<std::size_t> v, const std::string& what) {
  if (!v) throw std::invalid_argument("transformed model lacks " + what);
  return *v;
}

}  // namespace

Relation::Relation(const SfcModel& m, const ComposedModel& b, const TraceMap& tm) {
  for (const auto& s : m.steps) {
    const std::string& comp = tm.steps.at(s.name);
    StepRef r{};
    r.atomic = need(b.atomic_index(comp), comp);
    r.disabled = need(b.atomics[r.atomic].location_index("DISABLED"), comp + ".DISABLED");
    if (auto it = tm.starters.find(s.name); it != tm.starters.end()) {
      r.starter = need(b.atomic_index(it->second), it->second);
      r.starter_active = need(b.atomics[*r.starter].location_index("ACTIVE"), it->second + ".ACTIVE");
    }
    steps_.push_back(r);
  }
  for (const auto& a : m.actions) {
    const std::string& comp = tm.actions.at(a.name).acb;
    auto ai = need(b.atomic_index(comp), comp);
    e_slot_.push_back(offset_of(b, ai) + need(b.atomics[ai].var_index("e"), comp + ".e"));
  }
  for (const auto& x : m.vars) {
    const std::string& comp = tm.vars.at(x.name);
    auto ai = need(b.atomic_index(comp), comp);
    auto off = offset_of(b, ai);
    vars_.push_back({off + need(b.atomics[ai].var_index("t"), comp + ".t"),
                     off + need(b.atomics[ai].var_index("v"), comp + ".v")});
  }
}

int Relation::failed_rule(const Configuration& c, const BipState& s, Rule3 r) const {
  if (s.error) return 1;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const auto& st = steps_[i];
    bool on = s.loc[st.atomic] != st.disabled || (st.starter && s.loc[*st.starter] == *st.starter_active);
    if (on != static_cast<bool>(c.active_steps[i])) return 1;
  }
  for (std::size_t a = 0; a < e_slot_.size(); ++a) {
    if ((s.vars[e_slot_[a]] == 1) != static_cast<bool>(c.active_actions[a])) return 2;
  }
  for (std::size_t x = 0; x < vars_.size(); ++x) {
    std::size_t slot = r == Rule3::pending ? vars_[x].t : vars_[x].v;
    if (s.vars[slot] != c.f.values[x]) return 3;
  }
  return 0;
}

bool check_g1a(const SfcModel& m, const ComposedModel& b, const TraceMap& tm, Rule3 r) {
  Relation rel(m, b, tm);
  auto ix = IndexedBip::build(b);
  return rel.relates(initial_config(m), initial_state(ix), r);
}

namespace {

struct Visit {
  std::size_t state;
  std::size_t depth;
  std::size_t parent;  // state id; the source for depth 1
  Interaction via;
};

struct Reach {
  std::vector<Visit> visits;  // BFS order
  bool truncated = false;
};

class BipSpace {
 public:
  BipSpace(const IndexedBip& ix, std::size_t depth, std::size_t max_states)
      : ix_(ix), depth_(depth), max_(max_states) {}

  std::optional<std::size_t> intern(const BipState& s) {
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    if (states.size() >= max_) return std::nullopt;
    index_.emplace(s, states.size());
    states.push_back(s);
    reach_.emplace_back();
    return states.size() - 1;
  }

  /// nullptr when the state limit was hit.
  const Reach* reach(std::size_t src) {
    if (reach_[src]) return &*reach_[src];
    Reach r;
    std::unordered_map<std::size_t, std::size_t> seen;
    std::deque<std::size_t> queue;  // indices into r.visits
    auto expand = [&](std::size_t from, std::size_t depth) -> bool {
      const BipState s = states[from];
      if (s.error) return true;
      auto en = enabled_interactions(ix_, s);
      if (depth == depth_) {
        if (!en.empty()) r.truncated = true;
        return true;
      }
      for (const auto& i : en) {
        auto res = apply_interaction(ix_, s, i);
        BipState next = res.defect ? BipState{{}, {}, true} : std::move(res.state);
        auto id = intern(next);
        if (!id) return false;
        if (seen.count(*id)) continue;
        seen.emplace(*id, r.visits.size());
        r.visits.push_back({*id, depth + 1, from, i});
        queue.push_back(r.visits.size() - 1);
      }
      return true;
    };
    if (!expand(src, 0)) return nullptr;
    while (!queue.empty()) {
      auto v = r.visits[queue.front()];
      queue.pop_front();
      if (!expand(v.state, v.depth)) return nullptr;
    }
    reach_[src] = std::move(r);
    return &*reach_[src];
  }

  std::vector<Interaction> path_to(std::size_t src, std::size_t visit) const {
    const Reach& r = *reach_[src];
    std::unordered_map<std::size_t, std::size_t> at;
    for (std::size_t i = 0; i < r.visits.size(); ++i) at.emplace(r.visits[i].state, i);
    std::vector<Interaction> path;
    std::size_t cur = visit;
    while (true) {
      path.push_back(r.visits[cur].via);
      if (r.visits[cur].depth == 1) break;
      cur = at.at(r.visits[cur].parent);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  std::vector<BipState> states;

 private:
  const IndexedBip& ix_;
  std::size_t depth_, max_;
  std::unordered_map<BipState, std::size_t, BipStateHash> index_;
  std::vector<std::optional<Reach>> reach_;
};

struct Obligation {
  std::size_t pair;
  MicroLabel label;
  std::size_t sfc_target;
  std::vector<std::size_t> cands;
  bool truncated = false;
  std::size_t searched = 0;
  int rule = 0;
};

}  // namespace

SimReport check_g1b(const SfcModel& m, const ComposedModel& b, const TraceMap& tm, const RelationOptions& opt,
                    const ExploreLimits& lim) {
  auto six = IndexedSfc::build(m);
  auto bix = IndexedBip::build(b);
  Relation rel(m, b, tm);
  SimReport rep;
  rep.rule3 = opt.rule3;
  rep.depth = opt.depth ? opt.depth : 4 * b.connectors.size();

  ExecOptions eo;
  eo.mode = ExecMode::phased;
  BipSpace bip(bix, rep.depth, lim.max_states);

  std::vector<SfcNode> sfc_nodes;
  std::unordered_map<SfcNode, std::size_t, SfcNodeHash> sfc_index;
  auto sfc_intern = [&](const SfcNode& n) {
    auto [it, fresh] = sfc_index.emplace(n, sfc_nodes.size());
    if (fresh) sfc_nodes.push_back(n);
    return it->second;
  };

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::unordered_map<std::uint64_t, std::size_t> pair_index;
  std::deque<std::size_t> queue;
  bool limited = false;
  auto pair_intern = [&](std::size_t sfc, std::size_t st) -> std::optional<std::size_t> {
    std::uint64_t key = (static_cast<std::uint64_t>(sfc) << 32) | st;
    auto it = pair_index.find(key);
    if (it != pair_index.end()) return it->second;
    if (pairs.size() >= lim.max_states) return std::nullopt;
    pair_index.emplace(key, pairs.size());
    pairs.emplace_back(sfc, st);
    queue.push_back(pairs.size() - 1);
    return pairs.size() - 1;
  };

  std::vector<Obligation> obs;
  auto s0 = bip.intern(initial_state(bix));
  pair_intern(sfc_intern(initial_node(six, eo)), *s0);

  while (!queue.empty() && !limited) {
    std::size_t p = queue.front();
    queue.pop_front();
    auto [sn, bs] = pairs[p];
    SfcNode node = sfc_nodes[sn];
    if (node.error) continue;
    for (const auto& st : micro_successors(six, node, eo)) {
      SfcNode tgt;
      if (st.defect) {
        tgt.error = true;
      } else {
        tgt = st.target;
      }
      Obligation ob{p, st.label, sfc_intern(tgt), {}, false, 0, 0};
      if (st.label.silent()) {
        auto q = pair_intern(ob.sfc_target, bs);
        if (!q) {
          limited = true;
          break;
        }
        ob.cands.push_back(*q);
        obs.push_back(std::move(ob));
        continue;
      }
      const Reach* r = bip.reach(bs);
      if (!r) {
        limited = true;
        break;
      }
      ob.truncated = r->truncated;
      ob.searched = r->visits.size();
      int best = 0;
      const Configuration& cp = sfc_nodes[ob.sfc_target].c;
      for (std::size_t vi = 0; vi < r->visits.size(); ++vi) {
        const auto& v = r->visits[vi];
        const BipState& cand = bip.states[v.state];
        bool match;
        if (tgt.error) {
          match = cand.error;
        } else {
          int f = rel.failed_rule(cp, cand, opt.rule3);
          match = f == 0;
          if (!cand.error) best = std::max(best, match ? 4 : f);
        }
        if (!match) continue;
        if (ob.cands.empty()) {
          rep.max_match_depth = std::max(rep.max_match_depth, v.depth);
          if (opt.replay) {
            BipState s = bip.states[bs];
            for (const auto& i : bip.path_to(bs, vi)) {
              auto res = apply_interaction(bix, s, i);
              s = res.defect ? BipState{{}, {}, true} : res.state;
            }
            bool ok = tgt.error ? s.error : (s == cand && rel.relates(cp, s, opt.rule3));
            if (!ok) throw std::logic_error("simulation witness does not replay");
            ++rep.witnesses_replayed;
          }
        }
        auto q = pair_intern(ob.sfc_target, v.state);
        if (!q) {
          limited = true;
          break;
        }
        ob.cands.push_back(*q);
      }
      ob.rule = best == 4 ? 0 : std::max(best, 1);
      obs.push_back(std::move(ob));
      if (limited) break;
    }
  }
  rep.pairs_checked = pairs.size();
  rep.obligations = obs.size();
  if (limited) {
    rep.verdict = SimVerdict::exhausted;
    rep.limit = "max_states";
    return rep;
  }

  // greatest fixpoint: drop pairs with an obligation that has no surviving candidate
  std::vector<bool> alive(pairs.size(), true);
  std::vector<std::size_t> live_count(obs.size());
  std::vector<std::vector<std::size_t>> users(pairs.size());
  std::vector<std::size_t> dead;
  for (std::size_t o = 0; o < obs.size(); ++o) {
    live_count[o] = obs[o].cands.size();
    for (auto c : obs[o].cands) users[c].push_back(o);
    if (obs[o].cands.empty()) dead.push_back(obs[o].pair);
  }
  while (!dead.empty()) {
    std::size_t p = dead.back();
    dead.pop_back();
    if (!alive[p]) continue;
    alive[p] = false;
    for (auto o : users[p]) {
      if (--live_count[o] == 0) dead.push_back(obs[o].pair);
    }
  }
  if (alive[0]) return rep;

  bool truncated = false;
  for (const auto& ob : obs) {
    if (!ob.cands.empty()) continue;
    truncated = truncated || ob.truncated;
    if (rep.failures.size() >= 20) continue;
    SimFailure f;
    f.label = label_str(ob.label, m);
    f.c = sfc_nodes[pairs[ob.pair].first].c;
    f.error_target = sfc_nodes[ob.sfc_target].error;
    f.c_prime = sfc_nodes[ob.sfc_target].c;
    f.c_hat = bip.states[pairs[ob.pair].second];
    f.frontier = ob.searched;
    f.truncated = ob.truncated;
    f.rule = ob.rule;
    rep.failures.push_back(std::move(f));
  }
  rep.verdict = truncated ? SimVerdict::exhausted : SimVerdict::fails;
  return rep;
}

nlohmann::ordered_json SimReport::to_json(const SfcModel& m, const IndexedBip& ix) const {
  nlohmann::ordered_json j;
  j["verdict"] = sim_verdict_name(verdict);
  j["rule3_variant"] = rule3_name(rule3);
  j["depth"] = depth;
  j["pairs_checked"] = pairs_checked;
  j["obligations"] = obligations;
  j["max_match_depth"] = max_match_depth;
  j["witnesses_replayed"] = witnesses_replayed;
  if (!limit.empty()) j["limit"] = limit;
  auto fs = nlohmann::ordered_json::array();
  for (const auto& f : failures) {
    nlohmann::ordered_json o;
    o["sfc_step_label"] = f.label;
    o["c"] = config_json(m, f.c);
    o["c_prime"] = f.error_target ? nlohmann::ordered_json("error") : config_json(m, f.c_prime);
    o["c_hat"] = state_json(ix, f.c_hat);
    o["frontier_size"] = f.frontier;
    o["depth_exhausted"] = f.truncated;
    o["rule"] = f.rule;
    fs.push_back(o);
  }
  j["failures"] = fs;
  return j;
}

G2Result check_g2_instance(const SfcModel& m, const ComposedModel& b, const TraceMap& tm, const Inv& bip_inv,
                           const ExploreLimits& lim) {
  G2Result r;
  auto bix = IndexedBip::build(b);
  auto bg = reachable_states(bix, {}, lim);
  r.bip = check_bip_invariant(bg, [&](const BipState& s) { return eval_inv(bip_inv, s); }).verdict;
  if (r.bip != CheckVerdict::holds) return r;
  r.translated = t_i(bip_inv, tm, m, b);
  auto six = IndexedSfc::build(m);
  auto sg = cycle_graph(six, lim);
  r.sfc = check_sfc_invariant(sg, [&](const Configuration& c) { return eval_inv(*r.translated, c); }).verdict;
  return r;
}

std::vector<std::vector<bool>> coactive_steps(const SfcModel& m) {
  auto ix = IndexedSfc::build(m);
  std::size_t n = m.steps.size();
  std::vector<std::vector<bool>> co(n, std::vector<bool>(n, false));
  auto mark = [&](std::size_t a, std::size_t b) {
    if (a == b || co[a][b]) return false;
    co[a][b] = co[b][a] = true;
    return true;
  };
  std::vector<std::size_t> init;
  for (const auto& s : m.initial) init.push_back(*m.step_index(s));
  for (auto a : init)
    for (auto b : init) mark(a, b);
  for (const auto& t : ix.transitions)
    for (auto a : t.tgt)
      for (auto b : t.tgt) mark(a, b);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& t : ix.transitions) {
      for (std::size_t s = 0; s < n; ++s) {
        if (std::find(t.src.begin(), t.src.end(), s) != t.src.end()) continue;
        bool with_src = std::any_of(t.src.begin(), t.src.end(), [&](std::size_t u) { return co[s][u]; });
        if (!with_src) continue;
        for (auto g : t.tgt) changed = mark(s, g) || changed;
      }
    }
  }
  return co;
}

Diagnostics static_raw_warning(const SfcModel& m) {
  Diagnostics out;
  auto ix = IndexedSfc::build(m);
  auto co = coactive_steps(m);
  std::size_t na = m.actions.size();
  std::vector<std::vector<bool>> pair(na, std::vector<bool>(na, false));
  for (std::size_t s = 0; s < m.steps.size(); ++s) {
    for (std::size_t u = 0; u < m.steps.size(); ++u) {
      if (s != u && !co[s][u]) continue;
      for (auto a : ix.step_actions[s])
        for (auto b : ix.step_actions[u])
          if (a != b) pair[a][b] = true;
    }
  }
  for (std::size_t ri = 0; ri < na; ++ri) {
    for (std::size_t rj = ri + 1; rj < na; ++rj) {
      std::size_t a = ix.by_rank[ri], b = ix.by_rank[rj];
      if (!pair[a][b]) continue;
      const auto& first = m.actions[a];
      const auto& second = m.actions[b];
      auto writes = action_writes(first, m.vars);
      auto reads = action_reads(second, m.vars);
      auto writes2 = action_writes(second, m.vars);
      for (const auto& x : writes) {
        if (std::find(reads.begin(), reads.end(), x) != reads.end()) {
          out.push_back({"read-after-write",
                         "actions " + first.name + " and " + second.name + " may be co-active and " + second.name +
                             " reads " + x + " written by " + first.name,
                         second.pos});
        }
        if (std::find(writes2.begin(), writes2.end(), x) != writes2.end()) {
          out.push_back({"write-write",
                         "actions " + first.name + " and " + second.name + " may be co-active and both write " + x,
                         second.pos});
        }
      }
    }
  }
  return out;
}

namespace {

struct ManagerRef {
  std::size_t atomic, done, wtick;
};

ManagerRef manager_ref(const IndexedBip& ix) {
  const auto& b = *ix.model;
  ManagerRef r{};
  r.atomic = need(b.atomic_index(manager_name()), "manager");
  r.done = need(b.atomics[r.atomic].location_index("DONE"), "manager DONE");
  r.wtick = need(b.connector_index("c_wtick"), "c_wtick");
  return r;
}

bool quiescent(const ManagerRef& mr, const BipState& s, const std::vector<Interaction>& en) {
  return s.loc[mr.atomic] == mr.done && en.size() == 1 && en[0].connector == mr.wtick;
}

std::optional<BipState> drive(const IndexedBip& ix, BipState s, bool tick_first, std::size_t max_steps) {
  auto mr = manager_ref(ix);
  for (std::size_t n = 0; n < max_steps; ++n) {
    if (s.error) return s;
    auto en = enabled_interactions(ix, s);
    if (en.empty()) return std::nullopt;
    if (quiescent(mr, s, en) && !(tick_first && n == 0)) return s;
    auto r = apply_interaction(ix, s, en[0]);
    s = r.defect ? BipState{{}, {}, true} : r.state;
  }
  return std::nullopt;
}

}  // namespace

std::optional<BipState> bip_quiesce(const IndexedBip& ix, const BipState& s, std::size_t max_steps) {
  return drive(ix, s, false, max_steps);
}

std::optional<BipState> bip_manager_cycle(const IndexedBip& ix, const BipState& s, std::size_t max_steps) {
  return drive(ix, s, true, max_steps);
}

MacroResult macro_cycle_check(const SfcModel& m, const ComposedModel& b, const TraceMap& tm, std::size_t k,
                              Rule3 r) {
  MacroResult res;
  auto six = IndexedSfc::build(m);
  auto bix = IndexedBip::build(b);
  Relation rel(m, b, tm);
  Configuration c = initial_config(m);
  auto s = bip_quiesce(bix, initial_state(bix));
  auto fail = [&](std::string msg) {
    res.ok = false;
    res.message = "cycle " + std::to_string(res.cycles + 1) + ": " + msg;
    return res;
  };
  if (!s) return fail("BIP model deadlocks before the first wTick");
  for (std::size_t i = 0; i < k; ++i) {
    auto next = run_cycle(six, c);
    if (auto* rv = std::get_if<RangeViolation>(&next)) return fail("SFC range violation " + rv->str());
    c = std::get<Configuration>(next);
    s = bip_manager_cycle(bix, *s);
    if (!s) return fail("BIP model deadlocks");
    if (s->error) return fail("BIP range violation");
    if (int f = rel.failed_rule(c, *s, r)) {
      return fail("rule" + std::to_string(f) + " fails: SFC " + config_str(m, c) + " vs BIP " + state_str(bix, *s));
    }
    ++res.cycles;
  }
  return res;
}

}  // namespace sfcbip
