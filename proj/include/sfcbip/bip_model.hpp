#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfcbip/diagnostics.hpp"
#include "sfcbip/expr.hpp"

namespace sfcbip {

struct BipPort {
  std::string name;
  std::optional<std::string> binds;  // the port's variable, none when empty
  SourcePos pos;

  bool operator==(const BipPort& o) const { return name == o.name && binds == o.binds; }
};

struct BipTransition {
  std::string port;
  std::string src;
  std::string tgt;
  ExprPtr guard;  // null means true
  Program update;
  SourcePos pos;
};

struct AtomicComponent {
  std::string name;
  std::vector<VarDecl> vars;
  std::vector<BipPort> ports;
  std::vector<std::string> locations;
  std::string initial;
  std::vector<BipTransition> transitions;
  SourcePos pos;

  std::optional<std::size_t> location_index(std::string_view n) const;
  std::optional<std::size_t> port_index(std::string_view n) const;
  std::optional<std::size_t> var_index(std::string_view n) const;
};

struct Endpoint {
  std::string component;
  std::string port;

  bool operator==(const Endpoint&) const = default;
  auto operator<=>(const Endpoint&) const = default;
};

struct Connector {
  std::string name;
  Endpoint sender;
  std::vector<Endpoint> receivers;
  SourcePos pos;

  bool operator==(const Connector& o) const {
    return name == o.name && sender == o.sender && receivers == o.receivers;
  }
};

struct ComposedModel {
  std::string name;
  std::vector<AtomicComponent> atomics;
  std::vector<Connector> connectors;
  /// Pairs (lower, higher) over connector names.
  std::vector<std::pair<std::string, std::string>> priority;

  std::optional<std::size_t> atomic_index(std::string_view n) const;
  std::optional<std::size_t> connector_index(std::string_view n) const;
  const AtomicComponent* atomic(std::string_view n) const;
  const Connector* connector(std::string_view n) const;
};

struct BipParseResult {
  std::optional<ComposedModel> model;
  Diagnostics diags;
  bool ok() const { return model.has_value() && diags.empty(); }
};

BipParseResult parse_bip(std::string_view text);
ComposedModel parse_bip_syntax(std::string_view text);
Diagnostics validate_bip(const ComposedModel& m);
std::string serialize(const ComposedModel& m);
std::string serialize(const AtomicComponent& a, int indent = 2);
bool structurally_equal(const AtomicComponent& a, const AtomicComponent& b);
bool structurally_equal(const ComposedModel& a, const ComposedModel& b);

/// Locations per atomic and one flat vector of all variables (atomic blocks in model order).
struct BipState {
  std::vector<std::uint32_t> loc;
  std::vector<Value> vars;
  bool error = false;

  bool operator==(const BipState&) const = default;
  auto operator<=>(const BipState&) const = default;
};

struct BipStateHash {
  std::size_t operator()(const BipState& s) const;
};

/// Index-resolved view used by bip-exec.
struct IndexedBip {
  struct Trans {
    std::uint32_t src, tgt;
    std::size_t port;
    ExprPtr guard;  // slots local to the atomic; null is true
    Program update;
  };
  struct Atomic {
    std::size_t var_offset = 0;
    std::size_t var_count = 0;
    std::vector<Trans> transitions;
    std::vector<int> port_slot;  // local slot of the bound variable, -1 when none
    /// by_port_loc[port][loc]: transition indices
    std::vector<std::vector<std::vector<std::size_t>>> by_port_loc;
  };
  struct Conn {
    std::vector<std::pair<std::size_t, std::size_t>> ends;  // (atomic, port); sender first
  };

  const ComposedModel* model = nullptr;
  std::vector<Atomic> atomics;
  std::vector<Conn> connectors;
  std::vector<std::vector<bool>> higher;  // higher[c][d]: d strictly above c
  std::vector<bool> has_higher;
  std::size_t var_total = 0;

  static IndexedBip build(const ComposedModel& m);
};

BipState initial_state(const IndexedBip& ix);

}  // namespace sfcbip
