#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "loopdom/expr.hpp"

namespace loopdom {

enum class VarKind { Stock, Flow, Aux, Const };

std::string_view to_string(VarKind kind);

struct Variable {
  std::string name;
  VarKind kind = VarKind::Aux;
  Expr expr;  // initial value for stocks
  std::vector<std::string> inflows;
  std::vector<std::string> outflows;
  SourceLoc loc;

  friend bool operator==(const Variable& a, const Variable& b) {
    return a.name == b.name && a.kind == b.kind && a.expr == b.expr &&
           a.inflows == b.inflows && a.outflows == b.outflows;
  }
};

struct RunSpec {
  double start = 0.0;
  double stop = 1.0;
  double dt = 1.0;

  /// Empty string when the spec is usable.
  std::string problem() const;
  std::size_t steps() const;
  double time_at(std::size_t k) const { return start + static_cast<double>(k) * dt; }

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceLoc loc;
  std::string message;
};

/// "file:line:col: error: message"
std::string format(const Diagnostic& d, std::string_view file = {});
bool has_errors(const std::vector<Diagnostic>& diags);

/// An immutable, name-resolved model. Construct through parse_model.
class Model {
 public:
  /// Resolves every variable reference and flow attachment. Throws
  /// std::invalid_argument on duplicate names or unresolved references.
  Model(std::vector<Variable> variables, RunSpec run_spec);

  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(int index) const { return variables_[index]; }
  std::size_t size() const { return variables_.size(); }
  const RunSpec& run_spec() const { return run_spec_; }

  std::optional<int> index_of(std::string_view name) const;

  /// Number of IF nodes in each variable's equation.
  int if_count(int index) const { return if_counts_[index]; }
  const std::vector<int>& inflows(int stock) const { return inflow_idx_[stock]; }
  const std::vector<int>& outflows(int stock) const { return outflow_idx_[stock]; }

  friend bool operator==(const Model& a, const Model& b) {
    return a.variables_ == b.variables_ && a.run_spec_ == b.run_spec_;
  }

 private:
  std::vector<Variable> variables_;
  RunSpec run_spec_;
  std::unordered_map<std::string, int> by_name_;
  std::vector<int> if_counts_;
  std::vector<std::vector<int>> inflow_idx_;
  std::vector<std::vector<int>> outflow_idx_;
};

struct ParseResult {
  std::optional<Model> model;
  std::vector<Diagnostic> diagnostics;  // may hold warnings on success

  bool ok() const { return model.has_value(); }
};

/// Parses the line-oriented model language and checks every Model invariant
/// except algebraic loops (see validate). A missing SPEC line gives the
/// default run 0..1 with DT 1.
ParseResult parse_model(std::string_view text);

/// Renders model source that parses back to an equal Model.
std::string print_model(const Model& model);

/// Errors only; empty iff the model has no instantaneous cycles among
/// auxiliaries and flows and all Model invariants hold.
std::vector<Diagnostic> validate(const Model& model);

enum class EdgeKind { Dependency, Inflow, Outflow };

struct Edge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::Dependency;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Causal dependency graph over named nodes.
class Digraph {
 public:
  Digraph() = default;
  Digraph(std::vector<std::string> names, std::vector<bool> is_stock, std::vector<Edge> edges);

  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int node) const { return names_[node]; }
  bool is_stock(int node) const { return is_stock_[node]; }
  const std::vector<bool>& stock_flags() const { return is_stock_; }
  std::size_t node_count() const { return names_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::optional<int> index_of(std::string_view name) const;
  std::optional<std::size_t> find_edge(int src, int dst) const;

 private:
  std::vector<std::string> names_;
  std::vector<bool> is_stock_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, int> by_name_;
  std::unordered_map<std::uint64_t, std::size_t> edge_index_;
};

/// One edge per distinct non-constant variable referenced in each auxiliary
/// or flow equation, plus one per flow attachment. Ordered by destination
/// declaration order, then by first occurrence within the equation (inflows
/// before outflows for stocks).
Digraph dependency_graph(const Model& model);

}  // namespace loopdom
