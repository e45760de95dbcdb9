#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfcbip/diagnostics.hpp"
#include "sfcbip/expr.hpp"

namespace sfcbip {

enum class Qualifier { N, S, R, P0, P1 };

const char* qualifier_name(Qualifier q);

/// `non_extended` is the executable fragment; `extended_syntax` accepts every
/// qualifier for representation and template generation only.
enum class Dialect { non_extended, extended_syntax };

struct ActionDef {
  std::string name;
  Program body;
  SourcePos pos;
};

struct ActionBlock {
  std::string action;
  Qualifier qualifier = Qualifier::N;
  SourcePos pos;
};

struct SfcStep {
  std::string name;
  std::vector<ActionBlock> blocks;
  SourcePos pos;
};

struct SfcTransition {
  std::string name;
  std::vector<std::string> src;
  ExprPtr guard;
  std::vector<std::string> tgt;
  SourcePos pos;
};

struct SfcModel {
  std::string name;
  Dialect dialect = Dialect::non_extended;
  std::vector<VarDecl> vars;
  std::vector<ActionDef> actions;
  std::vector<SfcStep> steps;
  std::vector<std::string> initial;
  std::vector<SfcTransition> transitions;
  /// The total order on actions, least first.
  std::vector<std::string> action_order;
  /// Pairs (lower, higher): the second transition has priority over the first.
  std::vector<std::pair<std::string, std::string>> priority;

  std::optional<std::size_t> step_index(std::string_view name) const;
  std::optional<std::size_t> action_index(std::string_view name) const;
  std::optional<std::size_t> var_index(std::string_view name) const;
  std::optional<std::size_t> transition_index(std::string_view name) const;

  /// S_N(a): steps whose blocks reference the action.
  std::vector<std::size_t> steps_of_action(std::size_t action) const;
};

/// Index-resolved view of a validated model used by the interpreters.
struct IndexedSfc {
  struct Trans {
    std::vector<std::size_t> src;
    std::vector<std::size_t> tgt;
    ExprPtr guard;  // resolved against the model variables
  };

  const SfcModel* model = nullptr;
  std::vector<Program> bodies;                   // per action, resolved
  std::vector<std::vector<std::size_t>> step_actions;  // per step, distinct actions
  std::vector<Trans> transitions;
  std::vector<std::size_t> order_rank;           // per action: position in the total order
  std::vector<std::size_t> by_rank;              // actions sorted by order
  /// higher[t][u]: u has strictly higher priority than t (transitive closure).
  std::vector<std::vector<bool>> higher;

  static IndexedSfc build(const SfcModel& m);
};

struct Configuration {
  Valuation f;
  std::vector<bool> active_steps;
  std::vector<bool> active_actions;

  bool operator==(const Configuration&) const = default;
  auto operator<=>(const Configuration&) const = default;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const;
};

/// Five-tuple configuration of the extended semantics. Representable and
/// serializable only; nothing executes it.
struct ExtConfiguration {
  Valuation f;
  std::vector<bool> ready_steps;
  std::vector<bool> active_steps;
  std::vector<bool> active_actions;
  std::vector<bool> stored_actions;

  bool operator==(const ExtConfiguration&) const = default;
};

struct SfcParseResult {
  std::optional<SfcModel> model;
  Diagnostics diags;
  bool ok() const { return model.has_value() && diags.empty(); }
};

/// Parses and validates. On any diagnostic the model is still returned when it
/// was syntactically complete, so callers can inspect it.
SfcParseResult parse_sfc(std::string_view text, Dialect dialect = Dialect::non_extended);

/// Parses without validation. Throws SyntaxError.
SfcModel parse_sfc_syntax(std::string_view text, Dialect dialect = Dialect::non_extended);

Diagnostics validate(const SfcModel& m);

std::string serialize(const SfcModel& m);

bool structurally_equal(const SfcModel& a, const SfcModel& b);

Configuration initial_config(const SfcModel& m);

}  // namespace sfcbip
