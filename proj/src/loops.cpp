#include "loopdom/loops.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "loopdom/graph.hpp"

namespace loopdom {

WeightedDigraph::WeightedDigraph(std::vector<std::string> names, std::vector<bool> is_stock,
                                 std::vector<WeightedEdge> edges, Options options)
    : names_(std::move(names)), is_stock_(std::move(is_stock)), out_(names_.size()) {
  if (is_stock_.size() != names_.size())
    throw std::invalid_argument("stock flags do not match node count");
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (!by_name_.emplace(names_[i], static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate node " + names_[i]);
  const int n = static_cast<int>(names_.size());
  for (const auto& e : edges) {
    if (e.src < 0 || e.dst < 0 || e.src >= n || e.dst >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (!std::isfinite(e.weight))
      throw std::invalid_argument("non-finite weight on " + names_[e.src] + " -> " + names_[e.dst]);
    for (const auto& a : out_[e.src])
      if (a.dst == e.dst)
        throw std::invalid_argument("duplicate edge " + names_[e.src] + " -> " + names_[e.dst]);
    if (options.prune_zero && e.weight == 0.0) continue;
    out_[e.src].push_back({e.dst, e.weight});
    ++edge_count_;
  }
  if (options.sort_outbound) {
    for (auto& arcs : out_)
      std::stable_sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
        return std::fabs(a.weight) > std::fabs(b.weight);
      });
  }
}

WeightedDigraph WeightedDigraph::unweighted(const Digraph& graph) {
  return with_weights(graph, std::vector<double>(graph.edges().size(), 1.0));
}

WeightedDigraph WeightedDigraph::with_weights(const Digraph& graph,
                                              const std::vector<double>& weights,
                                              Options options) {
  if (weights.size() != graph.edges().size())
    throw std::invalid_argument("one weight per edge required");
  std::vector<WeightedEdge> edges;
  edges.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    edges.push_back({graph.edges()[i].src, graph.edges()[i].dst, weights[i]});
  return WeightedDigraph(graph.names(), graph.stock_flags(), std::move(edges), options);
}

WeightedDigraph WeightedDigraph::at_step(const LinkScoreSeries& series, std::size_t k,
                                         Options options) {
  std::vector<double> weights;
  weights.reserve(series.scores.size());
  for (const auto& s : series.scores) weights.push_back(s[k]);
  return with_weights(series.graph, weights, options);
}

std::optional<int> WeightedDigraph::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> WeightedDigraph::weight(int src, int dst) const {
  for (const auto& a : out_[src])
    if (a.dst == dst) return a.weight;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::vector<std::string> canonical_form(std::span<const std::string> cycle) {
  if (cycle.empty()) throw MalformedCycle("empty cycle");
  std::size_t first = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    for (std::size_t j = i + 1; j < cycle.size(); ++j)
      if (cycle[i] == cycle[j]) throw MalformedCycle("repeated node " + cycle[i] + " in cycle");
    if (cycle[i] < cycle[first]) first = i;
  }
  std::vector<std::string> out;
  out.reserve(cycle.size());
  for (std::size_t i = 0; i < cycle.size(); ++i) out.push_back(cycle[(first + i) % cycle.size()]);
  return out;
}

std::string_view to_string(Provenance p) {
  return p == Provenance::Exhaustive ? "exhaustive" : "strongest-path";
}

std::string LoopCatalog::key(std::span<const std::string> canonical) {
  std::string k;
  for (const auto& n : canonical) {
    k += n;
    k += '\x1f';
  }
  return k;
}

bool LoopCatalog::insert(LoopRecord record) {
  record.cycle = canonical_form(record.cycle);
  if (!keys_.insert(key(record.cycle)).second) return false;
  records_.push_back(std::move(record));
  return true;
}

bool LoopCatalog::contains(std::span<const std::string> cycle) const {
  return keys_.count(key(canonical_form(cycle))) > 0;
}

// ---------------------------------------------------------------------------

namespace {

struct LocalArc {
  int dst;
  double weight;
};

/// Johnson's circuit search rooted at local node 0 of one strongly
/// connected component. Returns false once the cap is exceeded.
class CircuitSearch {
 public:
  CircuitSearch(const std::vector<std::vector<LocalArc>>& adj, const std::vector<int>& global,
                const WeightedDigraph& graph, LoopCatalog& catalog, std::size_t cap)
      : adj_(adj), global_(global), graph_(graph), catalog_(catalog), cap_(cap),
        blocked_(adj.size(), 0), blocked_by_(adj.size()) {}

  bool run() {
    struct Frame {
      int v;
      std::size_t next;
      bool found;
    };
    std::vector<Frame> frames;
    std::vector<int> path;
    std::vector<double> products{1.0};

    blocked_[0] = 1;
    path.push_back(0);
    frames.push_back({0, 0, false});
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next < adj_[f.v].size()) {
        const LocalArc arc = adj_[f.v][f.next++];
        if (arc.dst == 0) {
          f.found = true;
          if (!emit(path, products.back() * arc.weight)) return false;
        } else if (!blocked_[arc.dst]) {
          blocked_[arc.dst] = 1;
          path.push_back(arc.dst);
          products.push_back(products.back() * arc.weight);
          frames.push_back({arc.dst, 0, false});
        }
        continue;
      }
      const int v = f.v;
      const bool found = f.found;
      if (found) {
        unblock(v);
      } else {
        for (const auto& arc : adj_[v]) {
          auto& list = blocked_by_[arc.dst];
          if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
        }
      }
      frames.pop_back();
      path.pop_back();
      products.pop_back();
      if (found && !frames.empty()) frames.back().found = true;
    }
    return true;
  }

 private:
  bool emit(const std::vector<int>& path, double product) {
    if (catalog_.size() >= cap_) {
      catalog_.set_overflow(true);
      return false;
    }
    LoopRecord rec;
    rec.cycle.reserve(path.size());
    for (int v : path) rec.cycle.push_back(graph_.name(global_[v]));
    rec.discovery_score = product;
    catalog_.insert(std::move(rec));
    return true;
  }

  void unblock(int u) {
    std::vector<int> work{u};
    while (!work.empty()) {
      const int x = work.back();
      work.pop_back();
      if (!blocked_[x]) continue;
      blocked_[x] = 0;
      for (int w : blocked_by_[x]) work.push_back(w);
      blocked_by_[x].clear();
    }
  }

  const std::vector<std::vector<LocalArc>>& adj_;
  const std::vector<int>& global_;
  const WeightedDigraph& graph_;
  LoopCatalog& catalog_;
  std::size_t cap_;
  std::vector<char> blocked_;
  std::vector<std::vector<int>> blocked_by_;
};

/// Subgraph induced by `nodes` (sorted ascending), in local indices.
std::vector<std::vector<LocalArc>> induced(const WeightedDigraph& g, const std::vector<int>& nodes,
                                           std::vector<int>& local_of) {
  for (std::size_t i = 0; i < nodes.size(); ++i) local_of[nodes[i]] = static_cast<int>(i);
  std::vector<std::vector<LocalArc>> adj(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const auto& a : g.outbound(nodes[i]))
      if (local_of[a.dst] >= 0) adj[i].push_back({local_of[a.dst], a.weight});
  for (int v : nodes) local_of[v] = -1;
  return adj;
}

/// Nontrivial strongly connected components of the subgraph induced by
/// `nodes`, each sorted ascending.
std::vector<std::vector<int>> cyclic_components(const WeightedDigraph& g,
                                                const std::vector<int>& nodes,
                                                std::vector<int>& local_of) {
  const auto adj = induced(g, nodes, local_of);
  Adjacency plain(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (const auto& a : adj[i]) plain[i].push_back(a.dst);
  std::vector<std::vector<int>> out;
  for (auto& comp : strongly_connected_components(plain)) {
    const bool self = comp.size() == 1 &&
                      std::find(plain[comp[0]].begin(), plain[comp[0]].end(), comp[0]) !=
                          plain[comp[0]].end();
    if (comp.size() < 2 && !self) continue;
    std::vector<int> mapped;
    for (int l : comp) mapped.push_back(nodes[l]);
    std::sort(mapped.begin(), mapped.end());
    out.push_back(std::move(mapped));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

LoopCatalog enumerate_loops(const WeightedDigraph& graph, std::size_t cap) {
  if (cap < 1) throw std::invalid_argument("cap must be at least 1");
  LoopCatalog catalog(Provenance::Exhaustive);
  std::vector<int> local_of(graph.node_count(), -1);

  std::vector<int> all(graph.node_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  std::vector<std::vector<int>> work = cyclic_components(graph, all, local_of);
  std::reverse(work.begin(), work.end());

  // Each component is searched from its least node, which is then removed
  // and the remainder re-split into components.
  while (!work.empty()) {
    std::vector<int> comp = std::move(work.back());
    work.pop_back();
    const auto adj = induced(graph, comp, local_of);
    CircuitSearch search(adj, comp, graph, catalog, cap);
    if (!search.run()) break;
    comp.erase(comp.begin());
    auto rest = cyclic_components(graph, comp, local_of);
    for (auto it = rest.rbegin(); it != rest.rend(); ++it) work.push_back(std::move(*it));
  }
  return catalog;
}

LoopCatalog enumerate_loops(const Digraph& graph, std::size_t cap) {
  return enumerate_loops(WeightedDigraph::unweighted(graph), cap);
}

// ---------------------------------------------------------------------------

SearchStats strongest_path_pass(const WeightedDigraph& graph, LoopCatalog& registry,
                                std::optional<std::size_t> step, std::span<const int> starts) {
  const std::size_t n = graph.node_count();
  std::vector<int> stock_nodes;
  if (starts.empty()) {
    for (std::size_t i = 0; i < n; ++i)
      if (graph.is_stock(static_cast<int>(i))) stock_nodes.push_back(static_cast<int>(i));
    starts = stock_nodes;
  }

  SearchStats stats;
  std::vector<double> best(n, 0.0);
  std::vector<char> visiting(n, 0);
  std::vector<int> stack;

  struct Frame {
    int v;
    std::size_t next;
    double score;   // product of |weights| from the target
    double signed_product;
  };
  std::vector<Frame> frames;

  for (int target : starts) {
    auto visit = [&](int v, double score, double signed_product) {
      ++stats.calls;
      if (visiting[v]) {
        if (v == target) {
          LoopRecord rec;
          rec.cycle.reserve(stack.size());
          for (int u : stack) rec.cycle.push_back(graph.name(u));
          rec.discovery_score = signed_product;
          rec.found_at = step;
          if (registry.insert(std::move(rec))) ++stats.loops_found;
        }
        return;
      }
      if (score <= best[v]) return;
      best[v] = score;
      visiting[v] = 1;
      stack.push_back(v);
      frames.push_back({v, 0, score, signed_product});
      ++stats.expansions;
    };

    visit(target, 1.0, 1.0);
    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto arcs = graph.outbound(f.v);
      if (f.next < arcs.size()) {
        const auto arc = arcs[f.next++];
        const double score = f.score * std::fabs(arc.weight);
        const double signed_product = f.signed_product * arc.weight;
        visit(arc.dst, score, signed_product);
        continue;
      }
      visiting[f.v] = 0;
      stack.pop_back();
      frames.pop_back();
    }
  }
  return stats;
}

DiscoveryResult discover(const LinkScoreSeries& series, const DiscoveryConfig& config) {
  if (config.cap < 1) throw std::invalid_argument("cap must be at least 1");
  if (config.stride < 1) throw std::invalid_argument("stride must be at least 1");
  const WeightedDigraph::Options options{config.sort_outbound, true};
  DiscoveryResult result;

  bool overflowed = false;
  if (config.method != DiscoveryMethod::StrongestPath) {
    const auto composite = composite_scores(series, CompositeMode::Max);
    const auto graph = WeightedDigraph::with_weights(series.graph, composite.weights, options);
    LoopCatalog catalog = enumerate_loops(graph, config.cap);
    if (!catalog.overflow()) {
      result.catalog = std::move(catalog);
      return result;
    }
    if (config.method == DiscoveryMethod::Exhaustive) throw CapExceeded(catalog.size());
    overflowed = true;
  }

  result.catalog = LoopCatalog(Provenance::StrongestPath);
  result.catalog.set_overflow(overflowed);

  std::vector<std::size_t> steps;
  for (std::size_t k = 1; k <= series.steps(); k += config.stride) steps.push_back(k);
  result.passes = steps.size();

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, steps.size()));
  if (threads == 1) {
    for (std::size_t k : steps) {
      const auto graph = WeightedDigraph::at_step(series, k, options);
      result.stats += strongest_path_pass(graph, result.catalog, k);
    }
    return result;
  }

  // Passes are independent; each fills its own registry and the results are
  // merged in step order, so the outcome matches a sequential run.
  std::vector<LoopCatalog> local(steps.size(), LoopCatalog(Provenance::StrongestPath));
  std::vector<SearchStats> local_stats(steps.size());
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < steps.size(); i += threads) {
          const auto graph = WeightedDigraph::at_step(series, steps[i], options);
          local_stats[i] = strongest_path_pass(graph, local[i], steps[i]);
        }
      });
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    SearchStats s = local_stats[i];
    s.loops_found = 0;
    for (const auto& rec : local[i].records())
      if (result.catalog.insert(rec)) ++s.loops_found;
    result.stats += s;
  }
  return result;
}

}  // namespace loopdom
