#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "loopdom/link_scores.hpp"
#include "loopdom/loops.hpp"
#include "loopdom/simulate.hpp"

namespace loopdom {

enum class Polarity { Reinforcing, Balancing, Mixed };

std::string_view to_string(Polarity p);

struct LoopProfile {
  LoopRecord loop;
  std::vector<double> score_series;     // signed product of link scores per step
  std::vector<double> relative_series;  // |score| share across the catalog per step
  double avg_contribution = 0.0;        // mean relative share over steps 1..n
  Polarity polarity = Polarity::Mixed;
  bool ever_active = false;
};

/// Product of the loop's link scores at every step. Throws
/// std::invalid_argument if a loop edge is missing from the series.
std::vector<double> loop_score_series(std::span<const std::string> cycle,
                                      const LinkScoreSeries& series);

/// Per loop, per step: |L_i| / sum_j |L_j|, or 0 at steps where no loop is
/// active. Computed from log-magnitudes so long loops cannot overflow.
std::vector<std::vector<double>> relative_scores(const LoopCatalog& catalog,
                                                 const LinkScoreSeries& series);

/// Profiles in catalog order.
std::vector<LoopProfile> profile_loops(const LoopCatalog& catalog, const LinkScoreSeries& series);

/// Sorted by descending avg_contribution (catalog order breaks ties),
/// dropping loops below `threshold` and keeping at most `top`.
std::vector<LoopProfile> rank_and_filter(const LoopCatalog& catalog, const LinkScoreSeries& series,
                                         double threshold, std::size_t top = SIZE_MAX);

/// Reinforcing if every nonzero score is positive, balancing if every one is
/// negative, mixed otherwise (including never active).
Polarity classify_polarity(const LoopProfile& profile);

/// Longest common contiguous run of the two cycles, read cyclically,
/// divided by the longer length.
double common_segment_ratio(std::span<const std::string> a, std::span<const std::string> b);

struct CompletenessReport {
  struct TopEntry {
    std::size_t rank = 0;  // 1-based within the reference catalog
    std::vector<std::string> cycle;
    double avg_contribution = 0.0;
    bool present = false;
  };
  struct NearMiss {
    std::vector<std::string> reference;
    std::vector<std::string> candidate;
    double ratio = 0.0;
  };

  std::size_t reference_size = 0;
  std::size_t candidate_size = 0;
  std::size_t intersection = 0;
  std::vector<TopEntry> top;
  std::vector<NearMiss> near_misses;  // one best match per missing top loop
};

CompletenessReport compare_catalogs(const LoopCatalog& reference, const LoopCatalog& candidate,
                                    const LinkScoreSeries& series, std::size_t top_n,
                                    double near_miss_ratio = 0.6);

/// Open-loop steady-state gain around a loop: the product of partial
/// derivatives along each causal link, where each stock on the loop
/// contributes -(d net rate / d input) / (d net rate / d stock) instead of
/// its integration. Derivatives are exact (dual numbers) at the state of
/// `step`. Throws std::domain_error if the loop has no stock or a stock on
/// it has no instantaneous self-adjustment.
double static_loop_gain(const Model& model, const RunResult& run,
                        std::span<const std::string> cycle, std::size_t step = 0);

/// `time,loop_id,score,relative`; loop ids are 1-based positions in
/// `profiles`.
void write_analysis_csv(std::ostream& out, const std::vector<LoopProfile>& profiles,
                        const std::vector<double>& times);

}  // namespace loopdom
