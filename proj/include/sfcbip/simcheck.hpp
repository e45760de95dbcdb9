#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfcbip/bip_exec.hpp"
#include "sfcbip/diagnostics.hpp"
#include "sfcbip/invariants.hpp"
#include "sfcbip/sfc2bip.hpp"
#include "sfcbip/sfc_exec.hpp"

namespace sfcbip {

/// pending compares f(x) with the GV buffer t, committed with v.
enum class Rule3 { pending, committed };
const char* rule3_name(Rule3 r);
std::optional<Rule3> parse_rule3(std::string_view s);

struct RelationOptions {
  Rule3 rule3 = Rule3::pending;
  std::size_t depth = 0;  // BIP interactions per obligation; 0 picks 4 x connectors
  bool replay = true;     // re-run every discharged witness through bip-exec
};

/// Index of the SFC elements inside the transformed state vector.
class Relation {
 public:
  Relation(const SfcModel& m, const ComposedModel& b, const TraceMap& tm);

  /// 0 when related, otherwise the first failing rule (1, 2 or 3).
  int failed_rule(const Configuration& c, const BipState& s, Rule3 r) const;
  bool relates(const Configuration& c, const BipState& s, Rule3 r) const { return failed_rule(c, s, r) == 0; }

 private:
  struct StepRef {
    std::size_t atomic, disabled;
    std::optional<std::size_t> starter, starter_active;
  };
  struct VarRef {
    std::size_t t, v;
  };
  std::vector<StepRef> steps_;
  std::vector<std::size_t> e_slot_;  // per action
  std::vector<VarRef> vars_;
};

bool check_g1a(const SfcModel& m, const ComposedModel& b, const TraceMap& tm, Rule3 r);

enum class SimVerdict { holds, fails, exhausted };
const char* sim_verdict_name(SimVerdict v);

struct SimFailure {
  std::string label;  // SFC micro-step
  Configuration c, c_prime;
  bool error_target = false;
  BipState c_hat;
  std::size_t frontier = 0;  // BIP states searched for a match
  bool truncated = false;    // search stopped at the depth bound
  int rule = 0;              // first rule no searched state could satisfy
};

struct SimReport {
  SimVerdict verdict = SimVerdict::holds;
  Rule3 rule3 = Rule3::pending;
  std::size_t depth = 0;
  std::size_t pairs_checked = 0;
  std::size_t obligations = 0;
  std::size_t max_match_depth = 0;
  std::size_t witnesses_replayed = 0;
  std::string limit;  // set when a state limit stopped the search
  std::vector<SimFailure> failures;

  nlohmann::ordered_json to_json(const SfcModel& m, const IndexedBip& ix) const;
};

/// Weak simulation of the phased SFC micro-steps by priority-filtered BIP
/// interactions, computed as a greatest fixpoint over discovered pairs.
SimReport check_g1b(const SfcModel& m, const ComposedModel& b, const TraceMap& tm, const RelationOptions& opt = {},
                    const ExploreLimits& lim = {});

struct G2Result {
  CheckVerdict bip = CheckVerdict::holds;
  std::optional<CheckVerdict> sfc;  // unset when the BIP side already fails
  InvPtr translated;
  bool holds() const { return bip == CheckVerdict::holds && sfc == CheckVerdict::holds; }
};

/// Î over reachable BIP states, then T_I(Î) over macro-cycle boundary configurations.
G2Result check_g2_instance(const SfcModel& m, const ComposedModel& b, const TraceMap& tm, const Inv& bip_inv,
                           const ExploreLimits& lim = {});

/// Co-active action pairs (earlier, later) where the later one reads a variable
/// the earlier one writes, or both write the same variable.
Diagnostics static_raw_warning(const SfcModel& m);

/// Steps that may be active together (over-approximation from the chart's shape).
std::vector<std::vector<bool>> coactive_steps(const SfcModel& m);

/// Drives the BIP model one manager cycle: from a quiescent state, fires the
/// first enabled interaction in connector order until the next quiescent state
/// (manager back at DONE with only c_wtick enabled). Returns nullopt on deadlock.
std::optional<BipState> bip_manager_cycle(const IndexedBip& ix, const BipState& s, std::size_t max_steps = 100000);
/// Runs the start-up interactions preceding the first wTick.
std::optional<BipState> bip_quiesce(const IndexedBip& ix, const BipState& s, std::size_t max_steps = 100000);

struct MacroResult {
  bool ok = true;
  std::size_t cycles = 0;  // cycles compared successfully
  std::string message;
};

MacroResult macro_cycle_check(const SfcModel& m, const ComposedModel& b, const TraceMap& tm, std::size_t k,
                              Rule3 r = Rule3::committed);

}  // namespace sfcbip
