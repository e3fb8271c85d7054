#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "loopdom/model.hpp"
#include "loopdom/simulate.hpp"

namespace loopdom {

/// Signed score of every dependency edge at every step. Scores at t_0 are 0.
struct LinkScoreSeries {
  Digraph graph;
  std::vector<double> times;
  std::vector<std::vector<double>> scores;  // [edge][step]

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  double score(std::size_t edge, std::size_t step) const { return scores[edge][step]; }
};

/// Scores of all edges of dependency_graph(model) at step k (1 <= k <= n).
///
/// For x -> z with z an auxiliary or flow, z's equation is first gated: each
/// IF is replaced by the branch it took at step k-1, the structure that was
/// in force over [t_{k-1}, t_k]. If x no longer occurs the score is 0.
/// Otherwise the partial change is the gated equation with x at t_k and all
/// other inputs at t_{k-1}, minus the same equation entirely at t_{k-1}, and
///
///   s = |partial / dz| * sign(partial * dx)
///
/// For a flow f -> stock S the partial is +-f(t_{k-1}) * dt and the total is
/// the increment applied to S over the step; the sign is +1 for inflows and
/// -1 for outflows. Every zero or non-finite denominator yields 0.
std::vector<double> link_score_step(const Model& model, const RunResult& run, std::size_t k);

LinkScoreSeries score_all(const Model& model, const RunResult& run);

/// A two-point series whose step-1 scores are the given edge weights; lets
/// static weighted graphs flow through the same analysis as a model run.
LinkScoreSeries static_series(const Digraph& graph, const std::vector<double>& weights);

enum class CompositeMode { Max, Average };

struct CompositeWeights {
  CompositeMode mode = CompositeMode::Max;
  std::vector<double> weights;  // per edge, signed
};

/// Max mode: largest |s| over all steps, sign of that observation (earliest
/// wins ties). Average mode: mean |s| over steps 1..n, sign of the majority
/// of nonzero observations (ties go to the earliest nonzero sign).
CompositeWeights composite_scores(const LinkScoreSeries& series, CompositeMode mode);

/// `time,src,dst,score`, one row per edge per step.
void write_csv(std::ostream& out, const LinkScoreSeries& series);

}  // namespace loopdom
