// sfc2bip: parse, transform, explore and check SFC and BIP models.
//
// Exit codes: 0 success / holds, 1 invalid model / violation / refutation,
// 2 usage error, 3 resource limit.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sfcbip/bip_exec.hpp"
#include "sfcbip/fixtures.hpp"
#include "sfcbip/invariants.hpp"
#include "sfcbip/random_model.hpp"
#include "sfcbip/sfc2bip.hpp"
#include "sfcbip/sfc_exec.hpp"
#include "sfcbip/simcheck.hpp"

using namespace sfcbip;
using json = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, violated = 1, usage = 2, limit = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int log_level() {
  const char* v = std::getenv("SFC2BIP_LOG");
  if (!v) return 0;
  std::string s = v;
  if (s == "debug" || s == "2") return 2;
  if (s == "info" || s == "1") return 1;
  return 0;
}

void log(int level, const std::string& msg) {
  static const int enabled = log_level();
  if (level <= enabled) std::cerr << "[" << (level >= 2 ? "debug" : "info") << "] " << msg << "\n";
}

class Timer {
 public:
  explicit Timer(std::string what) : what_(std::move(what)), t0_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
    std::ostringstream os;
    os << what_ << " took " << ms << " ms";
    log(1, os.str());
  }

 private:
  std::string what_;
  std::chrono::steady_clock::time_point t0_;
};

struct Options {
  std::string path, path2, inv, out, trace, format = "text", mode = "ordered", rule3 = "pending", direction;
  bool extended = false, literal_templates = false, no_priority = false, no_sfc_priority = false;
  bool transfer_after = false, boundaries = false, structural = false;
  std::size_t max_states = 200000, max_edges = 2000000, depth = 0;
  std::uint64_t seed = 0;
};

std::string load(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("cannot read '" + path + "'");
  return read_file(path);
}

bool is_sfc(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".sfc") return true;
  if (ext == ".bip") return false;
  throw UsageError("cannot tell the model kind of '" + path + "' (expected .sfc or .bip)");
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + o.out + "'");
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

ExploreLimits limits(const Options& o) { return {o.max_states, o.max_edges}; }

struct Loaded {
  std::optional<SfcModel> sfc;
  std::optional<ComposedModel> bip;
};

/// Returns nullopt (after printing diagnostics) when the model is invalid.
std::optional<Loaded> load_model(const Options& o, const std::string& path) {
  std::string text = load(path);
  Loaded l;
  Diagnostics diags;
  try {
    Timer t("parse " + path);
    if (is_sfc(path)) {
      auto r = parse_sfc(text, o.extended ? Dialect::extended_syntax : Dialect::non_extended);
      diags = r.diags;
      if (r.ok()) l.sfc = std::move(r.model);
    } else {
      auto r = parse_bip(text);
      diags = r.diags;
      if (r.ok()) l.bip = std::move(r.model);
    }
  } catch (const SyntaxError& e) {
    diags.push_back(e.diagnostic());
  }
  if (!diags.empty()) {
    std::cerr << path << ":\n" << format_diagnostics(diags);
    return std::nullopt;
  }
  return l;
}

void warn_raw(const SfcModel& m) {
  for (const auto& d : static_raw_warning(m)) std::cerr << "warning: " << d.message << "\n";
}

TransformOptions transform_options(const Options& o) {
  TransformOptions t;
  t.mode = o.extended ? TemplateMode::extended : TemplateMode::simple;
  t.literal_templates = o.literal_templates;
  t.sfc_priority = !o.no_sfc_priority;
  return t;
}

ExecOptions exec_options(const Options& o) {
  ExecOptions e;
  auto m = parse_exec_mode(o.mode);
  if (!m) throw UsageError("unknown mode '" + o.mode + "'");
  e.mode = *m;
  e.priority = !o.no_priority;
  return e;
}

BipOptions bip_options(const Options& o) {
  BipOptions b;
  b.priority = !o.no_priority;
  b.transfer_after = o.transfer_after;
  return b;
}

std::string inv_text(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) return read_file(arg);
  return arg;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Options& o) {
  auto l = load_model(o, o.path);
  if (o.format == "json") {
    json j{{"path", o.path}, {"valid", l.has_value()}};
    std::cout << dump(j);
  }
  if (!l) return violated;
  if (l->sfc) warn_raw(*l->sfc);
  if (o.format != "json") std::cout << o.path << ": ok\n";
  return ok;
}

int cmd_transform(const Options& o) {
  auto l = load_model(o, o.path);
  if (!l) return violated;
  if (!l->sfc) throw UsageError("transform expects an .sfc model");
  if (o.extended) std::cerr << "warning: extended templates are emitted for representation only; simulation checking is unsupported\n";
  TransformResult r;
  try {
    Timer t("transform");
    r = transform(*l->sfc, transform_options(o));
  } catch (const TransformError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return violated;
  }
  if (auto d = validate_bip(r.model); !d.empty()) {
    std::cerr << "internal error: transformed model does not validate\n" << format_diagnostics(d);
    return violated;
  }
  emit(o, serialize(r.model));
  std::string trace = o.trace;
  if (trace.empty() && !o.out.empty() && o.out != "-") trace = o.out + ".trace.json";
  if (!trace.empty()) {
    std::ofstream f(trace, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + trace + "'");
    f << dump(r.trace.to_json());
  }
  std::cerr << "atomics: " << r.model.atomics.size() << ", connectors: " << r.model.connectors.size() << "\n";
  return ok;
}

template <class G>
int reach_exit(const G& g) {
  return g.complete ? ok : limit;
}

int cmd_reach(const Options& o) {
  auto l = load_model(o, o.path);
  if (!l) return violated;
  json j;
  int code;
  if (l->sfc) {
    auto ix = IndexedSfc::build(*l->sfc);
    ConfigGraph g;
    {
      Timer t("explore");
      g = o.boundaries ? cycle_graph(ix, limits(o), !o.no_priority) : reachable_configs(ix, exec_options(o), limits(o));
    }
    j = {{"model", l->sfc->name}, {"kind", "sfc"}, {"mode", o.boundaries ? "cycle" : o.mode},
         {"nodes", g.nodes.size()}, {"edges", g.edges.size()}, {"defect_edges", g.defect_edges},
         {"error_state", g.error_node.has_value()}, {"complete", g.complete}};
    if (!g.complete) j["limit"] = g.limit;
    if (o.format == "dot") {
      emit(o, graph_dot(*l->sfc, g));
    } else if (!o.out.empty()) {
      emit(o, dump(graph_json(*l->sfc, g)));
    }
    code = reach_exit(g);
  } else {
    auto ix = IndexedBip::build(*l->bip);
    StateGraph g;
    {
      Timer t("explore");
      g = reachable_states(ix, bip_options(o), limits(o));
    }
    std::size_t deadlocks = 0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (!g.nodes[i].error && g.out[i].empty()) ++deadlocks;
    }
    j = {{"model", l->bip->name}, {"kind", "bip"}, {"nodes", g.nodes.size()}, {"edges", g.edges.size()},
         {"defect_edges", g.defect_edges}, {"error_state", g.error_node.has_value()},
         {"deadlocks", g.complete ? json(deadlocks) : json(nullptr)}, {"complete", g.complete}};
    if (!g.complete) j["limit"] = g.limit;
    if (o.format == "dot") {
      emit(o, graph_dot(ix, g));
    } else if (!o.out.empty()) {
      emit(o, dump(graph_json(ix, g)));
    }
    code = reach_exit(g);
  }
  if (o.format == "json") {
    std::cout << dump(j);
  } else if (o.format == "text") {
    for (const auto& [k, v] : j.items()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
  if (code == limit) std::cerr << "exploration stopped at " << j["limit"].get<std::string>() << "\n";
  return code;
}

int verdict_exit(CheckVerdict v) {
  switch (v) {
    case CheckVerdict::holds: return ok;
    case CheckVerdict::violated: return violated;
    case CheckVerdict::incomplete: return limit;
  }
  return violated;
}

int cmd_check_inv(const Options& o) {
  auto l = load_model(o, o.path);
  if (!l) return violated;
  json j;
  std::ostringstream text;
  CheckVerdict verdict;
  if (l->sfc) {
    const SfcModel& m = *l->sfc;
    InvPtr inv = o.structural ? structural_invariant(m) : parse_sfc_inv(inv_text(o.inv), m);
    auto ix = IndexedSfc::build(m);
    auto g = o.boundaries ? cycle_graph(ix, limits(o), !o.no_priority) : reachable_configs(ix, exec_options(o), limits(o));
    auto r = check_sfc_invariant(g, [&](const Configuration& c) { return eval_inv(*inv, c); });
    verdict = r.verdict;
    j = {{"invariant", to_string(*inv, InvSide::sfc)}, {"verdict", verdict_name(r.verdict)}, {"checked", r.checked}};
    json path = json::array();
    for (std::size_t i = 0; i < r.path.size(); ++i) {
      json step{{"config", node_json(m, g.nodes[r.path[i]])}};
      if (i > 0) step["via"] = label_str(g.edges[r.edge_path[i - 1]].label, m);
      path.push_back(step);
      if (i > 0) text << "  --" << label_str(g.edges[r.edge_path[i - 1]].label, m) << "-->\n";
      text << "  " << i << ": " << (g.nodes[r.path[i]].error ? "error" : config_str(m, g.nodes[r.path[i]].c)) << "\n";
    }
    if (!r.path.empty()) j["counterexample"] = path;
  } else {
    const ComposedModel& b = *l->bip;
    if (o.structural) throw UsageError("--structural applies to SFC models");
    InvPtr inv = parse_bip_inv(inv_text(o.inv), b);
    auto ix = IndexedBip::build(b);
    auto g = reachable_states(ix, bip_options(o), limits(o));
    auto r = check_bip_invariant(g, [&](const BipState& s) { return eval_inv(*inv, s); });
    verdict = r.verdict;
    j = {{"invariant", to_string(*inv, InvSide::bip)}, {"verdict", verdict_name(r.verdict)}, {"checked", r.checked}};
    std::vector<Interaction> steps;
    for (auto e : r.edge_path) steps.push_back(g.edges[e].label);
    if (!r.path.empty()) {
      j["counterexample"] = trace_json(ix, g.nodes[r.path[0]], steps, bip_options(o));
      for (std::size_t i = 0; i < r.path.size(); ++i) {
        if (i > 0) text << "  --" << interaction_str(ix, steps[i - 1]) << "-->\n";
        text << "  " << i << ": " << state_str(ix, g.nodes[r.path[i]]) << "\n";
      }
    }
  }
  if (o.format == "json") {
    std::cout << dump(j);
  } else {
    std::cout << j["invariant"].get<std::string>() << "\n" << verdict_name(verdict) << " (" << j["checked"].dump()
              << " states checked)\n";
    if (verdict == CheckVerdict::violated) std::cout << "counterexample:\n" << text.str();
  }
  return verdict_exit(verdict);
}

int cmd_translate_inv(const Options& o) {
  auto l = load_model(o, o.path);
  if (!l) return violated;
  if (!l->sfc) throw UsageError("translate-inv expects the source .sfc model");
  auto r = transform(*l->sfc, transform_options(o));
  InvPtr out;
  try {
    if (o.direction == "t_i") {
      auto in = parse_bip_inv(inv_text(o.inv), r.model);
      out = t_i(*in, r.trace, *l->sfc, r.model);
    } else {
      auto in = parse_sfc_inv(inv_text(o.inv), *l->sfc);
      out = t_r(*in, r.trace, *l->sfc, r.model);
    }
  } catch (const InvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return violated;
  }
  auto side = o.direction == "t_i" ? InvSide::sfc : InvSide::bip;
  if (o.format == "json") {
    std::cout << dump(json{{"direction", o.direction}, {"input", o.inv}, {"output", to_string(*out, side)}});
  } else {
    std::cout << to_string(*out, side) << "\n";
  }
  return ok;
}

int cmd_simrel(const Options& o) {
  auto l = load_model(o, o.path);
  if (!l) return violated;
  if (!l->sfc) throw UsageError("simrel expects an .sfc model");
  if (o.extended) {
    std::cerr << "error: simulation checking is unsupported for extended SFCs\n";
    return violated;
  }
  const SfcModel& m = *l->sfc;
  warn_raw(m);
  auto r = transform(m, transform_options(o));
  auto rule3 = parse_rule3(o.rule3);
  if (!rule3) throw UsageError("unknown rule3 variant '" + o.rule3 + "'");
  bool g1a = check_g1a(m, r.model, r.trace, *rule3);
  RelationOptions ro;
  ro.rule3 = *rule3;
  ro.depth = o.depth;
  SimReport rep;
  {
    Timer t("g1b");
    rep = check_g1b(m, r.model, r.trace, ro, limits(o));
  }
  auto ix = IndexedBip::build(r.model);
  json j{{"model", m.name}, {"g1a", g1a ? "holds" : "fails"}};
  j["g1b"] = rep.to_json(m, ix);
  if (!o.out.empty()) emit(o, dump(j));
  if (o.format == "json") {
    std::cout << dump(j);
  } else {
    std::cout << "G1a: " << (g1a ? "holds" : "fails") << "\n";
    std::cout << "G1b: " << sim_verdict_name(rep.verdict) << " (rule3 " << rule3_name(rep.rule3) << ", depth "
              << rep.depth << ", " << rep.pairs_checked << " pairs, " << rep.obligations << " obligations, max match depth "
              << rep.max_match_depth << ")\n";
    for (const auto& f : rep.failures) {
      std::cout << "  undischarged: " << f.label << " from " << config_str(m, f.c) << " to "
                << (f.error_target ? std::string("error") : config_str(m, f.c_prime)) << "\n    BIP " << state_str(ix, f.c_hat)
                << "\n    searched " << f.frontier << " states" << (f.truncated ? " (depth bound reached)" : "")
                << ", closest candidate fails rule" << f.rule << "\n";
    }
    if (!rep.limit.empty()) std::cout << "  stopped at " << rep.limit << "\n";
  }
  if (rep.verdict == SimVerdict::exhausted) return limit;
  if (!g1a || rep.verdict == SimVerdict::fails) return violated;
  return ok;
}

int cmd_generate(const Options& o) {
  auto m = random_sfc(o.seed);
  auto text = serialize(m);
  if (o.format == "json") {
    auto r = transform(m);
    json j{{"seed", o.seed},
           {"steps", m.steps.size()},
           {"vars", m.vars.size()},
           {"actions", m.actions.size()},
           {"transitions", m.transitions.size()},
           {"atomics", r.model.atomics.size()},
           {"connectors", r.model.connectors.size()},
           {"model", text}};
    emit(o, dump(j));
  } else {
    emit(o, text);
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SFC to BIP transformation and checking"};
  app.require_subcommand(1);
  Options o;

  auto limits_opts = [&o](CLI::App* c) {
    c->add_option("--max-states", o.max_states, "state limit")->check(CLI::PositiveNumber);
    c->add_option("--max-edges", o.max_edges, "edge limit")->check(CLI::PositiveNumber);
  };
  auto exec_opts = [&o](CLI::App* c) {
    auto mode = c->add_option("--mode", o.mode, "SFC scheduler")->check(CLI::IsMember({"literal", "ordered", "phased"}));
    auto b = c->add_flag("--boundaries", o.boundaries, "SFC: macro-cycle boundary configurations only");
    b->excludes(mode);
    c->add_flag("--no-priority", o.no_priority, "drop transition / connector priorities");
    c->add_flag("--transfer-after", o.transfer_after, "BIP: apply updates before the data transfer");
  };
  auto format_opt = [&o](CLI::App* c, std::vector<std::string> allowed) {
    c->add_option("--format", o.format, "output format")->check(CLI::IsMember(allowed));
  };
  auto transform_opts = [&o](CLI::App* c) {
    c->add_flag("--extended", o.extended, "extended SFC syntax and templates");
    c->add_flag("--literal-templates", o.literal_templates, "emit the template listings verbatim");
    c->add_flag("--no-sfc-priority-in-bip", o.no_sfc_priority, "do not map transition priority to connectors");
  };

  auto* validate = app.add_subcommand("validate", "parse and validate a .sfc or .bip model");
  validate->add_option("path", o.path)->required();
  validate->add_flag("--extended", o.extended, "accept extended SFC syntax");
  format_opt(validate, {"text", "json"});

  auto* tr = app.add_subcommand("transform", "transform an SFC into a BIP model");
  tr->add_option("path", o.path)->required();
  tr->add_option("-o,--output", o.out, "output .bip path");
  tr->add_option("--trace", o.trace, "trace map path (default: OUTPUT.trace.json)");
  transform_opts(tr);

  auto* reach = app.add_subcommand("reach", "explore the reachable state space");
  reach->add_option("path", o.path)->required();
  reach->add_option("-o,--output", o.out, "write the graph (json or dot)");
  limits_opts(reach);
  exec_opts(reach);
  reach->add_flag("--extended", o.extended, "accept extended SFC syntax");
  format_opt(reach, {"text", "json", "dot"});

  auto* chk = app.add_subcommand("check-inv", "check an invariant over reachable states");
  chk->add_option("path", o.path)->required();
  auto inv_arg = chk->add_option("invariant", o.inv, "invariant text or file");
  auto st = chk->add_flag("--structural", o.structural, "SFC structural invariant");
  st->excludes(inv_arg);
  limits_opts(chk);
  exec_opts(chk);
  format_opt(chk, {"text", "json"});

  auto* ti = app.add_subcommand("translate-inv", "translate invariants between the SFC and BIP sides");
  ti->add_option("direction", o.direction)->required()->check(CLI::IsMember({"t_i", "t_r"}));
  ti->add_option("path", o.path, "source .sfc model")->required();
  ti->add_option("invariant", o.inv, "invariant text or file")->required();
  transform_opts(ti);
  format_opt(ti, {"text", "json"});

  auto* sim = app.add_subcommand("simrel", "check G1a and G1b for an SFC and its transform");
  sim->add_option("path", o.path)->required();
  sim->add_option("--rule3", o.rule3, "variable rule")->check(CLI::IsMember({"pending", "committed"}));
  sim->add_option("--depth", o.depth, "BIP interactions per obligation (default 4 x connectors)")
      ->check(CLI::PositiveNumber);
  sim->add_option("-o,--output", o.out, "write the JSON report");
  limits_opts(sim);
  sim->add_flag("--no-sfc-priority-in-bip", o.no_sfc_priority, "do not map transition priority to connectors");
  sim->add_flag("--extended", o.extended, "extended SFC syntax (rejected)");
  format_opt(sim, {"text", "json"});

  auto* gen = app.add_subcommand("generate", "print a seed-controlled random SFC");
  gen->add_option("--seed", o.seed, "generator seed")->required();
  gen->add_option("-o,--output", o.out, "output path");
  format_opt(gen, {"text", "json"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? ok : usage;
  }

  if (chk->parsed() && o.inv.empty() && !o.structural) {
    std::cerr << "check-inv: an invariant or --structural is required\n";
    return usage;
  }

  try {
    if (validate->parsed()) return cmd_validate(o);
    if (tr->parsed()) return cmd_transform(o);
    if (reach->parsed()) return cmd_reach(o);
    if (chk->parsed()) return cmd_check_inv(o);
    if (ti->parsed()) return cmd_translate_inv(o);
    if (sim->parsed()) return cmd_simrel(o);
    if (gen->parsed()) return cmd_generate(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.diagnostic().str() << "\n";
    return violated;
  } catch (const InvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return violated;
  } catch (const TransformError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return violated;
  }
  return usage;
}
