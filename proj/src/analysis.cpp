#include "loopdom/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace loopdom {

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::Reinforcing: return "reinforcing";
    case Polarity::Balancing: return "balancing";
    case Polarity::Mixed: return "mixed";
  }
  return "?";
}

namespace {

std::vector<std::size_t> loop_edges(std::span<const std::string> cycle,
                                    const LinkScoreSeries& series) {
  std::vector<std::size_t> edges;
  edges.reserve(cycle.size());
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const std::string& from = cycle[i];
    const std::string& to = cycle[(i + 1) % cycle.size()];
    auto src = series.graph.index_of(from);
    auto dst = series.graph.index_of(to);
    std::optional<std::size_t> e;
    if (src && dst) e = series.graph.find_edge(*src, *dst);
    if (!e) throw std::invalid_argument("loop edge " + from + " -> " + to + " is not in the model");
    edges.push_back(*e);
  }
  return edges;
}

}  // namespace

std::vector<double> loop_score_series(std::span<const std::string> cycle,
                                      const LinkScoreSeries& series) {
  const auto edges = loop_edges(cycle, series);
  std::vector<double> out(series.times.size(), 1.0);
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t e : edges) out[k] *= series.scores[e][k];
  return out;
}

std::vector<std::vector<double>> relative_scores(const LoopCatalog& catalog,
                                                 const LinkScoreSeries& series) {
  const std::size_t steps = series.times.size();
  const std::size_t loops = catalog.size();
  // log|L_i(t_k)|, or -inf when some link is inactive.
  std::vector<std::vector<double>> logs(loops, std::vector<double>(steps, 0.0));
  for (std::size_t i = 0; i < loops; ++i) {
    const auto edges = loop_edges(catalog.records()[i].cycle, series);
    for (std::size_t k = 0; k < steps; ++k) {
      double l = 0.0;
      for (std::size_t e : edges) {
        const double s = series.scores[e][k];
        if (s == 0.0) {
          l = -HUGE_VAL;
          break;
        }
        l += std::log(std::fabs(s));
      }
      logs[i][k] = l;
    }
  }

  std::vector<std::vector<double>> rel(loops, std::vector<double>(steps, 0.0));
  for (std::size_t k = 0; k < steps; ++k) {
    double peak = -HUGE_VAL;
    for (std::size_t i = 0; i < loops; ++i) peak = std::max(peak, logs[i][k]);
    if (peak == -HUGE_VAL) continue;
    double total = 0.0;
    for (std::size_t i = 0; i < loops; ++i)
      if (logs[i][k] != -HUGE_VAL) total += std::exp(logs[i][k] - peak);
    for (std::size_t i = 0; i < loops; ++i)
      if (logs[i][k] != -HUGE_VAL) rel[i][k] = std::exp(logs[i][k] - peak) / total;
  }
  return rel;
}

Polarity classify_polarity(const LoopProfile& profile) {
  bool pos = false;
  bool neg = false;
  for (double s : profile.score_series) {
    if (s > 0) pos = true;
    if (s < 0) neg = true;
  }
  if (pos && !neg) return Polarity::Reinforcing;
  if (neg && !pos) return Polarity::Balancing;
  return Polarity::Mixed;
}

std::vector<LoopProfile> profile_loops(const LoopCatalog& catalog, const LinkScoreSeries& series) {
  const auto rel = relative_scores(catalog, series);
  const std::size_t n = series.steps();
  std::vector<LoopProfile> out;
  out.reserve(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    LoopProfile p;
    p.loop = catalog.records()[i];
    p.score_series = loop_score_series(p.loop.cycle, series);
    p.relative_series = rel[i];
    double sum = 0.0;
    for (std::size_t k = 1; k <= n; ++k) sum += p.relative_series[k];
    p.avg_contribution = n ? sum / static_cast<double>(n) : 0.0;
    p.ever_active = std::any_of(p.score_series.begin(), p.score_series.end(),
                                [](double s) { return s != 0.0; });
    p.polarity = classify_polarity(p);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<LoopProfile> rank_and_filter(const LoopCatalog& catalog, const LinkScoreSeries& series,
                                         double threshold, std::size_t top) {
  if (!(threshold >= 0.0 && threshold < 1.0))
    throw std::invalid_argument("threshold must be in [0, 1)");
  auto profiles = profile_loops(catalog, series);
  std::stable_sort(profiles.begin(), profiles.end(), [](const LoopProfile& a, const LoopProfile& b) {
    return a.avg_contribution > b.avg_contribution;
  });
  std::erase_if(profiles, [&](const LoopProfile& p) { return p.avg_contribution < threshold; });
  if (profiles.size() > top) profiles.resize(top);
  return profiles;
}

double common_segment_ratio(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0.0;
  const std::size_t m = a.size();
  const std::size_t p = b.size();
  const std::size_t cap = std::min(m, p);
  // Longest common substring of the doubled sequences, capped at the
  // shorter cycle so a run never wraps onto itself.
  std::vector<std::size_t> prev(2 * p + 1, 0), cur(2 * p + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= 2 * m; ++i) {
    for (std::size_t j = 1; j <= 2 * p; ++j) {
      cur[j] = a[(i - 1) % m] == b[(j - 1) % p] ? std::min(prev[j - 1] + 1, cap) : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(best) / static_cast<double>(std::max(m, p));
}

CompletenessReport compare_catalogs(const LoopCatalog& reference, const LoopCatalog& candidate,
                                    const LinkScoreSeries& series, std::size_t top_n,
                                    double near_miss_ratio) {
  for (const auto& rec : candidate.records()) loop_edges(rec.cycle, series);

  CompletenessReport report;
  report.reference_size = reference.size();
  report.candidate_size = candidate.size();
  for (const auto& rec : reference.records())
    if (candidate.contains(rec.cycle)) ++report.intersection;

  const auto ranked = rank_and_filter(reference, series, 0.0, top_n);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    CompletenessReport::TopEntry entry;
    entry.rank = i + 1;
    entry.cycle = ranked[i].loop.cycle;
    entry.avg_contribution = ranked[i].avg_contribution;
    entry.present = candidate.contains(entry.cycle);
    if (!entry.present) {
      const LoopRecord* best = nullptr;
      double best_ratio = 0.0;
      for (const auto& rec : candidate.records()) {
        const double r = common_segment_ratio(entry.cycle, rec.cycle);
        if (r > best_ratio) {
          best_ratio = r;
          best = &rec;
        }
      }
      if (best && best_ratio >= near_miss_ratio)
        report.near_misses.push_back({entry.cycle, best->cycle, best_ratio});
    }
    report.top.push_back(std::move(entry));
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

/// d(var's equation)/d(input), other direct inputs held fixed.
double direct_partial(const Model& model, const RunResult& run, int var, int input,
                      std::size_t step) {
  std::vector<Dual> env_values(model.size());
  for (std::size_t i = 0; i < model.size(); ++i)
    env_values[i] = {run.values[i][step], static_cast<int>(i) == input ? 1.0 : 0.0};
  EvalEnv<Dual> env{env_values, run.dt(), run.times[step]};
  return evaluate(model.variable(var).expr, env).deriv;
}

/// d(net rate of stock)/d(stock), through every instantaneous path.
double self_adjustment(const Model& model, const RunResult& run, int stock, std::size_t step) {
  std::vector<Dual> values(model.size());
  for (std::size_t i = 0; i < model.size(); ++i)
    values[i] = {run.values[i][step], static_cast<int>(i) == stock ? 1.0 : 0.0};
  for (int v : evaluation_order(model)) {
    EvalEnv<Dual> env{values, run.dt(), run.times[step]};
    values[v] = evaluate(model.variable(v).expr, env);
  }
  double net = 0.0;
  for (int f : model.inflows(stock)) net += values[f].deriv;
  for (int f : model.outflows(stock)) net -= values[f].deriv;
  return net;
}

}  // namespace

double static_loop_gain(const Model& model, const RunResult& run,
                        std::span<const std::string> cycle, std::size_t step) {
  std::vector<int> nodes;
  for (const auto& name : cycle) {
    auto idx = model.index_of(name);
    if (!idx) throw std::invalid_argument("unknown variable " + name);
    nodes.push_back(*idx);
  }
  auto first_stock = std::find_if(nodes.begin(), nodes.end(), [&](int v) {
    return model.variable(v).kind == VarKind::Stock;
  });
  if (first_stock == nodes.end()) throw std::domain_error("loop contains no stock");
  std::rotate(nodes.begin(), first_stock, nodes.end());

  double gain = 1.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int from = nodes[i];
    const int to = nodes[(i + 1) % nodes.size()];
    const Variable& dst = model.variable(to);
    if (dst.kind != VarKind::Stock) {
      gain *= direct_partial(model, run, to, from, step);
      continue;
    }
    const auto& in = model.inflows(to);
    const auto& out = model.outflows(to);
    double sign = 0.0;
    if (std::find(in.begin(), in.end(), from) != in.end()) sign = 1.0;
    if (std::find(out.begin(), out.end(), from) != out.end()) sign = -1.0;
    if (sign == 0.0)
      throw std::invalid_argument(model.variable(from).name + " is not a flow of " + dst.name);
    const double adjust = self_adjustment(model, run, to, step);
    if (adjust == 0.0) throw std::domain_error("stock " + dst.name + " has no self-adjustment");
    gain *= sign / -adjust;
  }
  return gain;
}

void write_analysis_csv(std::ostream& out, const std::vector<LoopProfile>& profiles,
                        const std::vector<double>& times) {
  out << "time,loop_id,score,relative\n";
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t i = 0; i < profiles.size(); ++i)
      out << format_double(times[k]) << ',' << i + 1 << ','
          << format_double(profiles[i].score_series[k]) << ','
          << format_double(profiles[i].relative_series[k]) << '\n';
}

}  // namespace loopdom
