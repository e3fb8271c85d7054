#include "loopdom/simulate.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <ostream>
#include <queue>

#include "loopdom/graph.hpp"

namespace loopdom {

std::span<const Branch> RunResult::branches_at(int var, std::size_t step) const {
  const auto n = static_cast<std::size_t>(if_counts[var]);
  return std::span<const Branch>(branches[var]).subspan(step * n, n);
}

SimulationError::SimulationError(std::string variable, std::size_t step, SourceLoc loc,
                                 const std::string& what)
    : std::runtime_error(what), variable_(std::move(variable)), step_(step), loc_(loc) {}

std::vector<int> evaluation_order(const Model& model) {
  const auto& vars = model.variables();
  const int n = static_cast<int>(vars.size());
  auto instantaneous = [&](int i) {
    return vars[i].kind == VarKind::Aux || vars[i].kind == VarKind::Flow;
  };
  Adjacency users(n);
  std::vector<int> pending(n, 0);
  for (int z = 0; z < n; ++z) {
    if (!instantaneous(z)) continue;
    for (const auto& name : referenced_names(vars[z].expr)) {
      const int x = *model.index_of(name);
      if (x == z || !instantaneous(x)) continue;
      users[x].push_back(z);
      ++pending[z];
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i)
    if (instantaneous(i) && pending[i] == 0) ready.push(i);
  std::vector<int> order;
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int z : users[v])
      if (--pending[z] == 0) ready.push(z);
  }
  return order;
}

std::vector<std::string> evaluation_order_names(const Model& model) {
  std::vector<std::string> out;
  for (int i : evaluation_order(model)) out.push_back(model.variable(i).name);
  return out;
}

double stock_increment(const Model& model, const RunResult& run, int stock, std::size_t k) {
  double net = 0.0;
  for (int f : model.inflows(stock)) net += run.values[f][k];
  for (int f : model.outflows(stock)) net -= run.values[f][k];
  return run.spec.dt * net;
}

namespace {

/// Constants and stock initial values, in dependency order.
std::vector<int> initial_order(const Model& model) {
  const auto& vars = model.variables();
  const int n = static_cast<int>(vars.size());
  std::vector<int> order;
  std::vector<char> state(n, 0);  // 0 new, 1 in progress, 2 done
  std::function<void(int)> visit = [&](int v) {
    if (state[v] == 2) return;
    if (state[v] == 1) throw std::invalid_argument("circular initial value at " + vars[v].name);
    state[v] = 1;
    for (const auto& name : referenced_names(vars[v].expr)) {
      const int x = *model.index_of(name);
      if (vars[x].kind == VarKind::Const || vars[x].kind == VarKind::Stock) visit(x);
    }
    state[v] = 2;
    order.push_back(v);
  };
  for (int i = 0; i < n; ++i)
    if (vars[i].kind == VarKind::Const || vars[i].kind == VarKind::Stock) visit(i);
  return order;
}

}  // namespace

RunResult simulate(const Model& model, const RunSpec& spec) {
  if (auto p = spec.problem(); !p.empty()) throw std::invalid_argument(p);
  const auto& vars = model.variables();
  const std::size_t nvars = vars.size();
  const std::size_t n = spec.steps();

  RunResult run;
  run.spec = spec;
  run.times.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) run.times[k] = spec.time_at(k);
  run.values.assign(nvars, std::vector<double>(n + 1, 0.0));
  run.branches.resize(nvars);
  run.if_counts.resize(nvars);
  for (std::size_t i = 0; i < nvars; ++i) {
    run.if_counts[i] = model.if_count(static_cast<int>(i));
    run.branches[i].assign((n + 1) * static_cast<std::size_t>(run.if_counts[i]),
                           Branch::Unreached);
  }

  std::vector<double> state(nvars, 0.0);
  auto fail = [&](int var, std::size_t step, SourceLoc loc, const std::string& what) {
    throw SimulationError(vars[var].name, step,
                          loc.line ? loc : vars[var].loc,
                          what + " in " + vars[var].name + " at step " + std::to_string(step) +
                              " (time " + format_double(spec.time_at(step)) + ")");
  };
  auto compute = [&](int var, std::size_t step, std::span<Branch> rec) {
    EvalEnv<double> env{state, spec.dt, spec.time_at(step), rec};
    double v = 0.0;
    try {
      v = evaluate(vars[var].expr, env);
    } catch (const EvalError& e) {
      fail(var, step, e.loc(), e.what());
    }
    if (!std::isfinite(v)) fail(var, step, vars[var].loc, "non-finite result");
    return v;
  };

  for (int v : initial_order(model)) state[v] = compute(v, 0, {});
  for (std::size_t i = 0; i < nvars; ++i)
    if (vars[i].kind == VarKind::Const) run.values[i].assign(n + 1, state[i]);

  const std::vector<int> order = evaluation_order(model);
  std::vector<int> stocks;
  for (std::size_t i = 0; i < nvars; ++i)
    if (vars[i].kind == VarKind::Stock) stocks.push_back(static_cast<int>(i));

  for (std::size_t k = 0; k <= n; ++k) {
    for (int s : stocks) run.values[s][k] = state[s];
    for (int v : order) {
      const auto slots = static_cast<std::size_t>(run.if_counts[v]);
      std::span<Branch> rec(run.branches[v].data() + k * slots, slots);
      state[v] = compute(v, k, rec);
      run.values[v][k] = state[v];
    }
    if (k == n) break;
    for (int s : stocks) {
      const double next = state[s] + stock_increment(model, run, s, k);
      if (!std::isfinite(next)) fail(s, k + 1, vars[s].loc, "non-finite stock value");
      state[s] = next;
    }
  }
  return run;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void write_csv(std::ostream& out, const Model& model, const RunResult& run) {
  out << "time";
  for (const auto& v : model.variables()) out << ',' << v.name;
  out << '\n';
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    out << format_double(run.times[k]);
    for (std::size_t i = 0; i < run.values.size(); ++i) out << ',' << format_double(run.values[i][k]);
    out << '\n';
  }
}

}  // namespace loopdom
