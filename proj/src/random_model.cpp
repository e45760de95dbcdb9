#include "sfcbip/random_model.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace sfcbip {

namespace {

// std distributions differ between standard libraries; plain modulo keeps
// generated models identical everywhere.
struct Rng {
  std::mt19937_64 eng;
  int range(int lo, int hi) { return lo + static_cast<int>(eng() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return eng() % 2 == 0; }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[eng() % i]);
  }
};

std::string int_body(Rng& r, const std::vector<VarDecl>& vars, const VarDecl& target) {
  std::vector<std::string> same;
  for (const auto& v : vars) {
    if (v.type == Type::Int && v.name != target.name) same.push_back(v.name);
  }
  switch (r.range(0, 3)) {
    case 0: return std::to_string(r.range(0, 3));
    case 1: return "3 - " + target.name;
    case 2:
      if (!same.empty()) return same[r.eng() % same.size()];
      return "3 - " + target.name;
    default: return "0";
  }
}

std::string bool_body(Rng& r, const std::vector<VarDecl>& vars, const VarDecl& target) {
  std::vector<std::string> ints;
  for (const auto& v : vars) {
    if (v.type == Type::Int) ints.push_back(v.name);
  }
  switch (r.range(0, 2)) {
    case 0: return "!" + target.name;
    case 1:
      if (!ints.empty()) return ints[r.eng() % ints.size()] + " >= " + std::to_string(r.range(1, 3));
      return "!" + target.name;
    default: return r.coin() ? "true" : "false";
  }
}

std::string guard_atom(Rng& r, const std::vector<VarDecl>& vars) {
  const auto& v = vars[r.eng() % vars.size()];
  if (v.type == Type::Bool) return r.coin() ? v.name : "!" + v.name;
  static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
  return v.name + " " + ops[r.eng() % 6] + " " + std::to_string(r.range(0, 3));
}

std::vector<std::string> pick(Rng& r, std::vector<std::string> pool, int n) {
  r.shuffle(pool);
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(n)));
  return pool;
}

}  // namespace

SfcModel random_sfc(std::uint64_t seed, const RandomModelShape& shape) {
  Rng r{std::mt19937_64(seed)};
  std::string text = "sfc rand" + std::to_string(seed) + " {\n";

  int nvars = r.range(shape.min_vars, shape.max_vars);
  std::vector<VarDecl> vars;
  for (int i = 0; i < nvars; ++i) {
    std::string n = "v" + std::to_string(i + 1);
    if (r.range(0, 3) == 0) {
      vars.push_back(VarDecl::boolean(n, r.coin()));
      text += "  var " + n + " : bool = " + (vars.back().init ? "true" : "false") + ";\n";
    } else {
      vars.push_back(VarDecl::integer(n, 0, 3, r.range(0, 3)));
      text += "  var " + n + " : int[0..3] = " + std::to_string(vars.back().init) + ";\n";
    }
  }

  int nact = r.range(shape.min_actions, shape.max_actions);
  std::vector<std::string> actions;
  for (int i = 0; i < nact; ++i) {
    actions.push_back("a" + std::to_string(i + 1));
    text += "  action " + actions.back() + " {";
    int nstmt = r.range(1, 2);
    for (int k = 0; k < nstmt; ++k) {
      const auto& t = vars[r.eng() % vars.size()];
      text += " " + t.name + " := " + (t.type == Type::Int ? int_body(r, vars, t) : bool_body(r, vars, t)) + ";";
    }
    text += " }\n";
  }

  int nsteps = r.range(shape.min_steps, shape.max_steps);
  std::vector<std::string> steps;
  for (int i = 0; i < nsteps; ++i) steps.push_back("S" + std::to_string(i + 1));
  auto initial = pick(r, steps, r.range(1, std::min(2, nsteps)));
  for (const auto& s : steps) {
    bool init = std::find(initial.begin(), initial.end(), s) != initial.end();
    text += "  step " + s + (init ? " init" : "") + " {";
    for (const auto& a : pick(r, actions, r.range(0, std::min(2, nact)))) text += " " + a + ";";
    text += " }\n";
  }

  int ntrans = r.range(shape.min_transitions, shape.max_transitions);
  auto list = [](const std::vector<std::string>& xs) {
    if (xs.size() == 1) return xs[0];
    std::string out = "(";
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
    return out + ")";
  };
  for (int i = 0; i < ntrans; ++i) {
    auto src = pick(r, steps, r.range(1, std::min(2, nsteps - 1)));
    std::vector<std::string> rest;
    for (const auto& s : steps) {
      if (std::find(src.begin(), src.end(), s) == src.end()) rest.push_back(s);
    }
    auto tgt = pick(r, rest, r.range(1, std::min<int>(2, static_cast<int>(rest.size()))));
    std::string guard;
    switch (r.range(0, 3)) {
      case 0: guard = "true"; break;
      case 1: guard = guard_atom(r, vars) + (r.coin() ? " && " : " || ") + guard_atom(r, vars); break;
      default: guard = guard_atom(r, vars); break;
    }
    text += "  transition t" + std::to_string(i + 1) + " : " + list(src) + " -> " + list(tgt) + " when " + guard + ";\n";
  }

  auto order = actions;
  r.shuffle(order);
  text += "  order " + order[0];
  for (std::size_t i = 1; i < order.size(); ++i) text += " < " + order[i];
  text += ";\n";
  for (int i = 0; i < ntrans; ++i) {
    for (int j = i + 1; j < ntrans; ++j) {
      if (r.range(0, 3) == 0) text += "  priority t" + std::to_string(j + 1) + " > t" + std::to_string(i + 1) + ";\n";
    }
  }
  text += "}\n";

  auto res = parse_sfc(text);
  if (!res.ok()) throw std::logic_error("random model failed validation:\n" + format_diagnostics(res.diags) + text);
  return std::move(*res.model);
}

}  // namespace sfcbip
