#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sfcbip/bip_exec.hpp"
#include "sfcbip/sfc2bip.hpp"
#include "sfcbip/sfc_exec.hpp"

namespace sfcbip {

enum class InvSide { sfc, bip };

enum class InvKind { constant, cond, active, enabled, at, neg, conj, disj };

struct Inv;
using InvPtr = std::shared_ptr<const Inv>;

/// Boolean skeleton over atoms. SFC atoms: cond (over model variables),
/// active(step), enabled(action). BIP atoms: cond (over `comp.var` names,
/// slots index the flat state vector) and at(comp, loc).
struct Inv {
  InvKind kind = InvKind::constant;
  bool value = true;          // constant
  ExprPtr cond;               // cond: as written
  ExprPtr resolved;           // cond: slots bound
  std::string component;      // at
  std::string name;           // active / enabled: step or action; at: location
  std::size_t index = 0;      // step, action or atomic index
  std::size_t location = 0;   // at
  std::vector<InvPtr> kids;   // neg: 1, conj/disj: 2
};

class InvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

InvPtr inv_const(bool v);
InvPtr inv_not(InvPtr a);
InvPtr inv_and(InvPtr a, InvPtr b);
InvPtr inv_or(InvPtr a, InvPtr b);

/// Throws SyntaxError on malformed text and InvError on unknown names.
InvPtr parse_sfc_inv(std::string_view text, const SfcModel& m);
InvPtr parse_bip_inv(std::string_view text, const ComposedModel& b);

bool eval_inv(const Inv& inv, const Configuration& c);
bool eval_inv(const Inv& inv, const BipState& s);

std::string to_string(const Inv& inv, InvSide side);
bool structurally_equal(const Inv& a, const Inv& b);

/// Negation pushed down to atoms.
InvPtr normalize_nnf(const InvPtr& inv);

/// Conjunction over actions of the active-step / active-action correspondence.
InvPtr structural_invariant(const SfcModel& m);

/// BIP invariant to SFC invariant (atom-wise). Throws InvError on atoms that
/// mix components or that mention both t and v of a GV.
InvPtr t_i(const Inv& bip, const TraceMap& tm, const SfcModel& m, const ComposedModel& b);
/// SFC requirement to BIP predicate (atom-wise).
InvPtr t_r(const Inv& sfc, const TraceMap& tm, const SfcModel& m, const ComposedModel& b);

}  // namespace sfcbip
