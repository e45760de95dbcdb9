#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sfcbip/sfc_model.hpp"

namespace sfcbip {

/// literal: any active action may execute. ordered: only the ⊑-least one.
/// phased: EXEC / TRAN / ACT discipline mirroring the manager's three ticks.
enum class ExecMode { literal, ordered, phased };

const char* exec_mode_name(ExecMode m);
std::optional<ExecMode> parse_exec_mode(std::string_view s);

struct ExecOptions {
  ExecMode mode = ExecMode::ordered;
  bool priority = true;  // false drops the ≺ filter from stepTransition
};

enum class Phase : std::uint8_t { none, exec, tran, act };

const char* phase_name(Phase p);

enum class MicroKind : std::uint8_t { execute_action, step_transition, activate_action, phase_move, cycle };

struct MicroLabel {
  MicroKind kind = MicroKind::execute_action;
  std::size_t action = 0;      // execute_action, activate_action
  std::size_t transition = 0;  // step_transition
  std::size_t step = 0;        // activate_action
  Phase to_phase = Phase::none;

  bool silent() const { return kind == MicroKind::phase_move; }
  auto operator<=>(const MicroLabel&) const = default;
  bool operator==(const MicroLabel&) const = default;
};

std::string label_str(const MicroLabel& l, const SfcModel& m);

/// Exploration node. Outside phased mode only `c` is meaningful.
struct SfcNode {
  Configuration c;
  Phase phase = Phase::none;
  std::vector<bool> pending;  // TRAN: transitions still to take this phase
  std::vector<bool> entered;  // TRAN: steps entered this phase
  bool error = false;

  auto operator<=>(const SfcNode&) const = default;
  bool operator==(const SfcNode&) const = default;
};

struct SfcNodeHash {
  std::size_t operator()(const SfcNode& n) const;
};

SfcNode initial_node(const IndexedSfc& ix, const ExecOptions& opt);

struct MicroStep {
  MicroLabel label;
  SfcNode target;
  std::optional<RangeViolation> defect;  // target is unused when set
};

/// The non-conflicting enabled set 𝒯 of one cycle.
std::vector<bool> enabled_set(const IndexedSfc& ix, const Configuration& c, bool priority = true);

bool transition_enabled(const IndexedSfc& ix, const Configuration& c, std::size_t t);

std::vector<MicroStep> micro_successors(const IndexedSfc& ix, const SfcNode& n, const ExecOptions& opt);

struct ExploreLimits {
  std::size_t max_states = 200000;
  std::size_t max_edges = 2000000;
};

struct SfcEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  MicroLabel label;
};

struct ConfigGraph {
  std::vector<SfcNode> nodes;
  std::vector<SfcEdge> edges;
  std::vector<std::vector<std::size_t>> out;  // per node: edge indices
  std::vector<bool> observed;                 // nodes an invariant is checked on
  std::optional<std::size_t> error_node;
  std::size_t defect_edges = 0;
  bool complete = true;
  std::string limit;  // "max_states" / "max_edges" when incomplete
  std::size_t frontier = 0;

  std::size_t initial() const { return 0; }
};

ConfigGraph reachable_configs(const IndexedSfc& ix, const ExecOptions& opt, const ExploreLimits& lim = {});

/// One SFC macro-cycle.
std::variant<Configuration, RangeViolation> run_cycle(const IndexedSfc& ix, const Configuration& c,
                                                      bool priority = true);

/// Closure of run_cycle from c0. c0 is observed only when some cycle re-reaches it.
ConfigGraph cycle_graph(const IndexedSfc& ix, const ExploreLimits& lim = {}, bool priority = true);

enum class CheckVerdict { holds, violated, incomplete };

const char* verdict_name(CheckVerdict v);

struct SfcCheckResult {
  CheckVerdict verdict = CheckVerdict::holds;
  std::vector<std::size_t> path;  // node indices from c0 to the violating node
  std::vector<std::size_t> edge_path;
  std::size_t checked = 0;
};

using ConfigPredicate = std::function<bool(const Configuration&)>;

/// Shortest counterexample by BFS over the recorded edges. Partial graphs are refused.
SfcCheckResult check_sfc_invariant(const ConfigGraph& g, const ConfigPredicate& inv);

nlohmann::ordered_json config_json(const SfcModel& m, const Configuration& c);
nlohmann::ordered_json node_json(const SfcModel& m, const SfcNode& n);
nlohmann::ordered_json graph_json(const SfcModel& m, const ConfigGraph& g);
std::string graph_dot(const SfcModel& m, const ConfigGraph& g);
std::string config_str(const SfcModel& m, const Configuration& c);

}  // namespace sfcbip
