#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfcbip/bip_model.hpp"
#include "sfcbip/sfc_model.hpp"

namespace sfcbip {

enum class TemplateMode { simple, extended };

struct TransformOptions {
  TemplateMode mode = TemplateMode::simple;
  /// Emit the listings verbatim: GV starts at READ, steps have no ENTERED
  /// location and the starter drives tIn. The composed model then deadlocks
  /// (GV) or lets steps chain within one phase; useful for conformance only.
  bool literal_templates = false;
  /// Map the SFC transition priority onto guard connectors.
  bool sfc_priority = true;
};

class TransformError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceMap {
  struct ActionEntry {
    std::string component;
    std::string acb;
  };
  std::map<std::string, std::string> steps;        // step -> step component
  std::map<std::string, ActionEntry> actions;      // action -> (action component, ACB)
  std::map<std::string, std::string> vars;         // variable -> GV
  std::map<std::string, std::string> transitions;  // transition -> guard component
  std::map<std::string, std::string> starters;     // initial step -> starter
  std::string manager;
  std::map<std::string, std::vector<std::string>> steps_of_action;  // S_N(a)

  nlohmann::ordered_json to_json() const;
};

AtomicComponent create_acb(const std::string& action, TemplateMode mode);
AtomicComponent create_action_component(const ActionDef& a, const std::vector<VarDecl>& vars);
AtomicComponent create_step(const SfcStep& s, bool literal = false);
AtomicComponent create_guard(const SfcTransition& t, const std::vector<VarDecl>& vars, TemplateMode mode);
AtomicComponent create_manager();
AtomicComponent create_gv(const VarDecl& x, bool literal = false);
AtomicComponent create_starter(const std::string& step);

/// Variables a guard reads, in declaration order.
std::vector<std::string> guard_reads(const SfcTransition& t, const std::vector<VarDecl>& vars);
/// Variables an action reads before writing / writes, in declaration order.
std::vector<std::string> action_reads(const ActionDef& a, const std::vector<VarDecl>& vars);
std::vector<std::string> action_writes(const ActionDef& a, const std::vector<VarDecl>& vars);

struct TransformResult {
  ComposedModel model;
  TraceMap trace;
};

/// Throws TransformError for extended input in simple mode, for transitions
/// whose source and target sets overlap, and for generated-name clashes.
TransformResult transform(const SfcModel& m, const TransformOptions& opt = {});

std::string gv_name(const std::string& x);
std::string action_component_name(const std::string& a);
std::string acb_name(const std::string& a);
std::string step_component_name(const std::string& s);
std::string starter_name(const std::string& s);
std::string guard_name(const std::string& t);
inline const char* manager_name() { return "mgr"; }

}  // namespace sfcbip
