#include "loopdom/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "loopdom/graph.hpp"
#include "semantics.hpp"

namespace loopdom {

std::string_view to_string(VarKind kind) {
  switch (kind) {
    case VarKind::Stock: return "STOCK";
    case VarKind::Flow: return "FLOW";
    case VarKind::Aux: return "AUX";
    case VarKind::Const: return "CONST";
  }
  return "?";
}

std::string RunSpec::problem() const {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(dt))
    return "run spec values must be finite";
  if (!(dt > 0.0)) return "DT must be positive";
  if (!(stop > start)) return "STOP must be greater than START";
  const double n = (stop - start) / dt;
  if (std::fabs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    return "(STOP - START) / DT must be a whole number of steps";
  return {};
}

std::size_t RunSpec::steps() const {
  return static_cast<std::size_t>(std::llround((stop - start) / dt));
}

std::string format(const Diagnostic& d, std::string_view file) {
  std::string out;
  if (!file.empty()) {
    out += file;
    out += ':';
  }
  out += std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": ";
  out += d.severity == Severity::Error ? "error: " : "warning: ";
  out += d.message;
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace {

void resolve(Expr& e, const std::unordered_map<std::string, int>& names) {
  if (e.op == Op::Variable) {
    auto it = names.find(e.name);
    if (it == names.end()) throw std::invalid_argument("unresolved reference " + e.name);
    e.var = it->second;
  }
  for (auto& a : e.args) resolve(a, names);
}

struct Reference {
  const std::string* name;
  SourceLoc loc;
};

void walk_refs(const Expr& e, std::vector<Reference>& refs, bool& uses_time) {
  if (e.op == Op::Variable) refs.push_back({&e.name, e.loc});
  if (e.op == Op::Time) uses_time = true;
  for (const auto& a : e.args) walk_refs(a, refs, uses_time);
}

}  // namespace

Model::Model(std::vector<Variable> variables, RunSpec run_spec)
    : variables_(std::move(variables)), run_spec_(run_spec) {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (!by_name_.emplace(variables_[i].name, static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate variable " + variables_[i].name);
  }
  if_counts_.resize(variables_.size());
  inflow_idx_.resize(variables_.size());
  outflow_idx_.resize(variables_.size());
  auto flow_index = [&](const std::string& name) {
    auto it = by_name_.find(name);
    if (it == by_name_.end() || variables_[it->second].kind != VarKind::Flow)
      throw std::invalid_argument(name + " is not a declared flow");
    return it->second;
  };
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    Variable& v = variables_[i];
    resolve(v.expr, by_name_);
    if_counts_[i] = assign_branch_slots(v.expr);
    for (const auto& f : v.inflows) inflow_idx_[i].push_back(flow_index(f));
    for (const auto& f : v.outflows) outflow_idx_[i].push_back(flow_index(f));
  }
}

std::optional<int> Model::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

void check_semantics(const std::vector<Variable>& vars, std::vector<Diagnostic>& diags) {
  std::unordered_map<std::string, int> names;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!names.emplace(vars[i].name, static_cast<int>(i)).second)
      diags.push_back({Severity::Error, vars[i].loc, "duplicate name " + vars[i].name});
  }

  // Constants and stock initial values form their own dependency graph,
  // evaluated once before the run; it must be acyclic.
  Adjacency init_graph(vars.size());
  std::vector<char> attached(vars.size(), 0);

  for (std::size_t i = 0; i < vars.size(); ++i) {
    const Variable& v = vars[i];
    std::vector<Reference> refs;
    bool uses_time = false;
    walk_refs(v.expr, refs, uses_time);

    if (uses_time && (v.kind == VarKind::Const || v.kind == VarKind::Stock)) {
      diags.push_back({Severity::Error, v.loc,
                       v.kind == VarKind::Const ? "constant " + v.name + " may not use TIME"
                                                : "initial value of " + v.name +
                                                      " may not use TIME"});
    }
    for (const auto& r : refs) {
      auto it = names.find(*r.name);
      if (it == names.end()) {
        diags.push_back({Severity::Error, r.loc, "unresolved reference " + *r.name});
        continue;
      }
      const VarKind target = vars[it->second].kind;
      if (v.kind == VarKind::Const && target != VarKind::Const) {
        diags.push_back({Severity::Error, r.loc,
                         "constant " + v.name + " may only reference constants, not " + *r.name});
      } else if (v.kind == VarKind::Stock && target != VarKind::Const &&
                 target != VarKind::Stock) {
        diags.push_back({Severity::Error, r.loc,
                         "initial value of " + v.name +
                             " may only reference constants and stocks, not " + *r.name});
      } else if (v.kind == VarKind::Const || v.kind == VarKind::Stock) {
        init_graph[i].push_back(it->second);
      }
    }

    if (v.kind != VarKind::Stock) {
      if (!v.inflows.empty() || !v.outflows.empty())
        diags.push_back({Severity::Error, v.loc, "only stocks may have flows"});
      continue;
    }
    std::vector<std::string> seen;
    for (const auto* list : {&v.inflows, &v.outflows}) {
      for (const auto& f : *list) {
        auto it = names.find(f);
        if (it == names.end()) {
          diags.push_back({Severity::Error, v.loc, "unresolved flow " + f + " on stock " + v.name});
        } else if (vars[it->second].kind != VarKind::Flow) {
          diags.push_back({Severity::Error, v.loc, f + " on stock " + v.name + " is not a FLOW"});
        } else {
          attached[it->second] = 1;
        }
        if (std::find(seen.begin(), seen.end(), f) != seen.end())
          diags.push_back(
              {Severity::Error, v.loc, "flow " + f + " attached twice to stock " + v.name});
        seen.push_back(f);
      }
    }
  }

  for (const auto& comp : strongly_connected_components(init_graph)) {
    const int first = comp.front();
    const bool self = std::find(init_graph[first].begin(), init_graph[first].end(), first) !=
                      init_graph[first].end();
    if (comp.size() < 2 && !self) continue;
    std::vector<int> sorted = comp;
    std::sort(sorted.begin(), sorted.end());
    std::string msg = "circular initial value definition:";
    for (std::size_t k = 0; k < sorted.size(); ++k)
      msg += (k ? ", " : " ") + vars[sorted[k]].name;
    diags.push_back({Severity::Error, vars[sorted.front()].loc, msg});
  }

  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].kind == VarKind::Flow && !attached[i])
      diags.push_back({Severity::Warning, vars[i].loc,
                       "flow " + vars[i].name + " is not attached to any stock"});
  }
}

std::vector<Diagnostic> validate(const Model& model) {
  std::vector<Diagnostic> all;
  if (auto p = model.run_spec().problem(); !p.empty())
    all.push_back({Severity::Error, SourceLoc{}, p});
  check_semantics(model.variables(), all);
  std::vector<Diagnostic> errors;
  for (auto& d : all)
    if (d.severity == Severity::Error) errors.push_back(std::move(d));

  // Instantaneous dependencies among auxiliaries and flows.
  const auto& vars = model.variables();
  Adjacency graph(vars.size());
  auto instantaneous = [](VarKind k) { return k == VarKind::Aux || k == VarKind::Flow; };
  for (std::size_t z = 0; z < vars.size(); ++z) {
    if (!instantaneous(vars[z].kind)) continue;
    for (const auto& name : referenced_names(vars[z].expr)) {
      auto x = model.index_of(name);
      if (x && instantaneous(vars[*x].kind)) graph[*x].push_back(static_cast<int>(z));
    }
  }
  for (const auto& comp : strongly_connected_components(graph)) {
    const int first = comp.front();
    const bool self =
        std::find(graph[first].begin(), graph[first].end(), first) != graph[first].end();
    if (comp.size() < 2 && !self) continue;
    std::vector<int> sorted = comp;
    std::sort(sorted.begin(), sorted.end());
    std::string msg = "algebraic loop:";
    for (std::size_t k = 0; k < sorted.size(); ++k)
      msg += (k ? ", " : " ") + vars[sorted[k]].name;
    errors.push_back({Severity::Error, vars[sorted.front()].loc, msg});
  }
  return errors;
}

namespace {

std::string number_text(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

std::string print_model(const Model& model) {
  const RunSpec& rs = model.run_spec();
  std::string out = "SPEC START = " + number_text(rs.start) + " STOP = " + number_text(rs.stop) +
                    " DT = " + number_text(rs.dt) + "\n";
  for (const auto& v : model.variables()) {
    out += to_string(v.kind);
    out += ' ' + v.name + " = " + to_string(v.expr);
    if (v.kind == VarKind::Stock) {
      out += " {";
      if (!v.inflows.empty()) out += " inflow: " + join(v.inflows);
      if (!v.outflows.empty()) out += " outflow: " + join(v.outflows);
      out += " }";
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
std::uint64_t edge_key(int src, int dst) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
         static_cast<std::uint32_t>(dst);
}
}  // namespace

Digraph::Digraph(std::vector<std::string> names, std::vector<bool> is_stock,
                 std::vector<Edge> edges)
    : names_(std::move(names)), is_stock_(std::move(is_stock)), edges_(std::move(edges)) {
  if (is_stock_.size() != names_.size())
    throw std::invalid_argument("stock flags do not match node count");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!by_name_.emplace(names_[i], static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate node " + names_[i]);
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.src < 0 || e.dst < 0 || static_cast<std::size_t>(e.src) >= names_.size() ||
        static_cast<std::size_t>(e.dst) >= names_.size())
      throw std::invalid_argument("edge endpoint out of range");
    if (!edge_index_.emplace(edge_key(e.src, e.dst), i).second)
      throw std::invalid_argument("duplicate edge " + names_[e.src] + " -> " + names_[e.dst]);
  }
}

std::optional<int> Digraph::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Digraph::find_edge(int src, int dst) const {
  auto it = edge_index_.find(edge_key(src, dst));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

Digraph dependency_graph(const Model& model) {
  const auto& vars = model.variables();
  std::vector<std::string> names;
  std::vector<bool> stocks;
  for (const auto& v : vars) {
    names.push_back(v.name);
    stocks.push_back(v.kind == VarKind::Stock);
  }
  std::vector<Edge> edges;
  for (std::size_t z = 0; z < vars.size(); ++z) {
    const Variable& v = vars[z];
    const int dst = static_cast<int>(z);
    switch (v.kind) {
      case VarKind::Aux:
      case VarKind::Flow:
        for (const auto& name : referenced_names(v.expr)) {
          const int src = *model.index_of(name);
          if (vars[src].kind == VarKind::Const) continue;
          edges.push_back({src, dst, EdgeKind::Dependency});
        }
        break;
      case VarKind::Stock:
        for (int f : model.inflows(dst)) edges.push_back({f, dst, EdgeKind::Inflow});
        for (int f : model.outflows(dst)) edges.push_back({f, dst, EdgeKind::Outflow});
        break;
      case VarKind::Const:
        break;
    }
  }
  return Digraph(std::move(names), std::move(stocks), std::move(edges));
}

}  // namespace loopdom
