#include "loopdom/link_scores.hpp"

#include <cmath>
#include <optional>
#include <ostream>

namespace loopdom {

namespace {

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double ratio_score(double partial, double total, double input_change) {
  if (total == 0.0 || input_change == 0.0) return 0.0;
  const double s = std::fabs(partial / total) * sign(partial * input_change);
  return std::isfinite(s) ? s : 0.0;
}

std::vector<double> score_step(const Model& model, const Digraph& graph, const RunResult& run,
                               std::size_t k) {
  const auto& vars = model.variables();
  const std::size_t nvars = vars.size();

  std::vector<double> prev(nvars);
  for (std::size_t i = 0; i < nvars; ++i) prev[i] = run.values[i][k - 1];
  const double dt = run.dt();
  const double prev_time = run.times[k - 1];

  std::vector<double> out(graph.edges().size(), 0.0);
  std::optional<int> gated_for;
  Expr gated;

  for (std::size_t ei = 0; ei < graph.edges().size(); ++ei) {
    const Edge& e = graph.edges()[ei];
    const double dx = run.values[e.src][k] - run.values[e.src][k - 1];

    if (e.kind != EdgeKind::Dependency) {
      const double sgn = e.kind == EdgeKind::Inflow ? 1.0 : -1.0;
      const double partial = sgn * run.values[e.src][k - 1] * dt;
      const double total = stock_increment(model, run, e.dst, k - 1);
      if (total == 0.0) continue;
      const double s = std::fabs(partial / total) * sgn;
      out[ei] = std::isfinite(s) ? s : 0.0;
      continue;
    }

    if (gated_for != e.dst) {
      const int slots = model.if_count(e.dst);
      gated = slots ? gate(vars[e.dst].expr, run.branches_at(e.dst, k - 1)) : vars[e.dst].expr;
      gated_for = e.dst;
    }
    const double dz = run.values[e.dst][k] - run.values[e.dst][k - 1];
    if (dz == 0.0 || dx == 0.0 || !references(gated, e.src)) continue;

    double partial = 0.0;
    try {
      EvalEnv<double> env{prev, dt, prev_time};
      const double base = evaluate(gated, env);
      prev[e.src] = run.values[e.src][k];
      const double moved = evaluate(gated, env);
      partial = moved - base;
    } catch (const EvalError&) {
      partial = 0.0;
    }
    prev[e.src] = run.values[e.src][k - 1];
    out[ei] = ratio_score(partial, dz, dx);
  }
  return out;
}

}  // namespace

std::vector<double> link_score_step(const Model& model, const RunResult& run, std::size_t k) {
  if (k < 1 || k > run.steps()) throw std::out_of_range("link score step out of range");
  return score_step(model, dependency_graph(model), run, k);
}

LinkScoreSeries score_all(const Model& model, const RunResult& run) {
  LinkScoreSeries series;
  series.graph = dependency_graph(model);
  series.times = run.times;
  const std::size_t n = run.steps();
  series.scores.assign(series.graph.edges().size(), std::vector<double>(n + 1, 0.0));
  for (std::size_t k = 1; k <= n; ++k) {
    const auto step = score_step(model, series.graph, run, k);
    for (std::size_t e = 0; e < step.size(); ++e) series.scores[e][k] = step[e];
  }
  return series;
}

LinkScoreSeries static_series(const Digraph& graph, const std::vector<double>& weights) {
  if (weights.size() != graph.edges().size())
    throw std::invalid_argument("one weight per edge required");
  LinkScoreSeries series;
  series.graph = graph;
  series.times = {0.0, 1.0};
  for (double w : weights) series.scores.push_back({0.0, w});
  return series;
}

CompositeWeights composite_scores(const LinkScoreSeries& series, CompositeMode mode) {
  CompositeWeights out;
  out.mode = mode;
  const std::size_t n = series.steps();
  for (const auto& s : series.scores) {
    if (mode == CompositeMode::Max) {
      double best = 0.0;
      for (std::size_t k = 0; k <= n; ++k)
        if (std::fabs(s[k]) > std::fabs(best)) best = s[k];
      out.weights.push_back(best);
      continue;
    }
    double sum = 0.0;
    int balance = 0;
    double first_sign = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      sum += std::fabs(s[k]);
      if (s[k] != 0.0) {
        balance += s[k] > 0 ? 1 : -1;
        if (first_sign == 0.0) first_sign = sign(s[k]);
      }
    }
    const double mean = n ? sum / static_cast<double>(n) : 0.0;
    const double sgn = balance > 0 ? 1.0 : balance < 0 ? -1.0 : first_sign;
    out.weights.push_back(mean * (sgn == 0.0 ? 1.0 : sgn));
  }
  return out;
}

void write_csv(std::ostream& out, const LinkScoreSeries& series) {
  out << "time,src,dst,score\n";
  const auto& g = series.graph;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      out << format_double(series.times[k]) << ',' << g.name(g.edges()[e].src) << ','
          << g.name(g.edges()[e].dst) << ',' << format_double(series.scores[e][k]) << '\n';
    }
  }
}

}  // namespace loopdom
