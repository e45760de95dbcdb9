#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfcbip/bip_model.hpp"
#include "sfcbip/sfc_exec.hpp"

namespace sfcbip {

struct BipOptions {
  bool transfer_after = false;  // literal substitution order: updates first, then transfer
  bool priority = true;
};

struct Interaction {
  std::size_t connector = 0;
  std::vector<std::size_t> chosen;  // per connector endpoint: transition index in that atomic

  auto operator<=>(const Interaction&) const = default;
  bool operator==(const Interaction&) const = default;
};

/// Every combination of enabled endpoint transitions, in connector order.
std::vector<Interaction> raw_interactions(const IndexedBip& ix, const BipState& s);
/// raw_interactions filtered to global-maximal priority.
std::vector<Interaction> enabled_interactions(const IndexedBip& ix, const BipState& s, const BipOptions& opt = {});

struct TransferRecord {
  std::optional<Value> value;  // sampled sender value, none when the sender binds nothing
};

struct ApplyResult {
  BipState state;
  std::optional<RangeViolation> defect;
  TransferRecord transfer;
};

ApplyResult apply_interaction(const IndexedBip& ix, const BipState& s, const Interaction& i,
                              const BipOptions& opt = {});

struct BipEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  Interaction label;
};

struct StateGraph {
  std::vector<BipState> nodes;
  std::vector<BipEdge> edges;
  std::vector<std::vector<std::size_t>> out;
  std::optional<std::size_t> error_node;
  std::size_t defect_edges = 0;
  bool complete = true;
  std::string limit;
  std::size_t frontier = 0;
};

StateGraph reachable_states(const IndexedBip& ix, const BipOptions& opt = {}, const ExploreLimits& lim = {});

using StatePredicate = std::function<bool(const BipState&)>;

struct BipCheckResult {
  CheckVerdict verdict = CheckVerdict::holds;
  std::vector<std::size_t> path;
  std::vector<std::size_t> edge_path;
  std::size_t checked = 0;
};

BipCheckResult check_bip_invariant(const StateGraph& g, const StatePredicate& inv);

/// Value of `component.var` in a state; throws std::out_of_range when unknown.
Value var_value(const IndexedBip& ix, const BipState& s, std::string_view component, std::string_view var);
const std::string& location_name(const IndexedBip& ix, const BipState& s, std::size_t atomic);

std::string interaction_str(const IndexedBip& ix, const Interaction& i);
std::string state_str(const IndexedBip& ix, const BipState& s);
nlohmann::ordered_json state_json(const IndexedBip& ix, const BipState& s);
nlohmann::ordered_json interaction_json(const IndexedBip& ix, const Interaction& i, const TransferRecord* tr = nullptr);
nlohmann::ordered_json graph_json(const IndexedBip& ix, const StateGraph& g);
std::string graph_dot(const IndexedBip& ix, const StateGraph& g);
/// Replays interactions from `start` and renders the trace format.
nlohmann::ordered_json trace_json(const IndexedBip& ix, const BipState& start, const std::vector<Interaction>& steps,
                                  const BipOptions& opt = {});

}  // namespace sfcbip
