#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "loopdom/link_scores.hpp"
#include "loopdom/model.hpp"

namespace loopdom {

struct WeightedEdge {
  int src = 0;
  int dst = 0;
  double weight = 1.0;
};

struct WeightedDigraphOptions {
  bool sort_outbound = true;
  bool prune_zero = true;
};

/// Static directed graph with one signed weight per edge. Outbound arcs of
/// each node are sorted by descending |weight| (stable for ties) unless
/// sorting is disabled.
class WeightedDigraph {
 public:
  struct Arc {
    int dst;
    double weight;
  };

  using Options = WeightedDigraphOptions;

  WeightedDigraph(std::vector<std::string> names, std::vector<bool> is_stock,
                  std::vector<WeightedEdge> edges, Options options);
  WeightedDigraph(std::vector<std::string> names, std::vector<bool> is_stock,
                  std::vector<WeightedEdge> edges)
      : WeightedDigraph(std::move(names), std::move(is_stock), std::move(edges), Options{}) {}

  /// Every edge at weight 1.
  static WeightedDigraph unweighted(const Digraph& graph);
  /// Edge weights taken from one step of a score series.
  static WeightedDigraph at_step(const LinkScoreSeries& series, std::size_t k,
                                 Options options = {});
  static WeightedDigraph with_weights(const Digraph& graph, const std::vector<double>& weights,
                                      Options options = {});

  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::string& name(int node) const { return names_[node]; }
  const std::vector<std::string>& names() const { return names_; }
  bool is_stock(int node) const { return is_stock_[node]; }
  std::span<const Arc> outbound(int node) const { return out_[node]; }
  std::optional<int> index_of(std::string_view name) const;
  std::optional<double> weight(int src, int dst) const;

 private:
  std::vector<std::string> names_;
  std::vector<bool> is_stock_;
  std::vector<std::vector<Arc>> out_;
  std::unordered_map<std::string, int> by_name_;
  std::size_t edge_count_ = 0;
};

class MalformedCycle : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rotation starting at the lexicographically smallest name; direction is
/// preserved. Throws MalformedCycle on an empty cycle or a repeated node.
std::vector<std::string> canonical_form(std::span<const std::string> cycle);

struct LoopRecord {
  std::vector<std::string> cycle;  // canonical rotation
  double discovery_score = 0.0;
  std::optional<std::size_t> found_at;  // nullopt: static graph

  friend bool operator==(const LoopRecord&, const LoopRecord&) = default;
};

enum class Provenance { Exhaustive, StrongestPath };

std::string_view to_string(Provenance p);

/// Insertion-ordered registry of loops, unique by canonical cycle.
class LoopCatalog {
 public:
  LoopCatalog() = default;
  explicit LoopCatalog(Provenance provenance) : provenance_(provenance) {}

  /// Canonicalizes the cycle; returns false if it was already present.
  bool insert(LoopRecord record);
  bool contains(std::span<const std::string> cycle) const;

  const std::vector<LoopRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  Provenance provenance() const { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = p; }
  bool overflow() const { return overflow_; }
  void set_overflow(bool v) { overflow_ = v; }

 private:
  static std::string key(std::span<const std::string> canonical);

  Provenance provenance_ = Provenance::Exhaustive;
  bool overflow_ = false;
  std::vector<LoopRecord> records_;
  std::unordered_set<std::string> keys_;
};

/// All elementary circuits (Johnson's algorithm over Tarjan components),
/// stopping once more than `cap` are found; the catalog then holds exactly
/// `cap` loops and the overflow flag is set. discovery_score is the signed
/// product of edge weights.
LoopCatalog enumerate_loops(const WeightedDigraph& graph, std::size_t cap);
LoopCatalog enumerate_loops(const Digraph& graph, std::size_t cap);

struct SearchStats {
  std::uint64_t calls = 0;       // visits attempted
  std::uint64_t expansions = 0;  // visits that passed the best-score test
  std::uint64_t loops_found = 0;

  SearchStats& operator+=(const SearchStats& o) {
    calls += o.calls;
    expansions += o.expansions;
    loops_found += o.loops_found;
    return *this;
  }
};

/// One strongest-path pass. Every start node is taken in turn as the target
/// and searched depth first, carrying the product of |weights|; a node is
/// entered only with a score strictly greater than its best so far (best
/// scores start at 0 and persist across targets within the pass). Reaching
/// the target while it is on the stack records the loop; reaching any other
/// node on the stack returns. Starts default to all stock nodes.
SearchStats strongest_path_pass(const WeightedDigraph& graph, LoopCatalog& registry,
                                std::optional<std::size_t> step,
                                std::span<const int> starts = {});

enum class DiscoveryMethod { Auto, Exhaustive, StrongestPath };

struct DiscoveryConfig {
  std::size_t cap = 1000;
  std::size_t stride = 1;
  DiscoveryMethod method = DiscoveryMethod::Auto;
  bool sort_outbound = true;
  unsigned threads = 1;
};

struct DiscoveryResult {
  LoopCatalog catalog;
  SearchStats stats;
  std::size_t passes = 0;
};

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(std::size_t partial)
      : std::runtime_error("cap exceeded after " + std::to_string(partial) + " loops"),
        partial_(partial) {}
  std::size_t partial() const { return partial_; }

 private:
  std::size_t partial_;
};

/// Exhaustive enumeration over the max-composite graph of ever-active links
/// when it stays within the cap; otherwise strongest-path passes at steps
/// 1, 1+stride, ... merged into one registry in step order. A forced
/// exhaustive run that overflows throws CapExceeded.
DiscoveryResult discover(const LinkScoreSeries& series, const DiscoveryConfig& config);

}  // namespace loopdom
