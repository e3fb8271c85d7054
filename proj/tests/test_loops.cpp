#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "loopdom/link_scores.hpp"
#include "loopdom/loops.hpp"
#include "loopdom/simulate.hpp"
#include "support.hpp"

using namespace loopdom;

namespace {

using Cycle = std::vector<std::string>;

std::set<Cycle> cycles_of(const LoopCatalog& c) {
  std::set<Cycle> out;
  for (const auto& r : c.records()) out.insert(r.cycle);
  return out;
}

WeightedDigraph graph_from(int n, const std::vector<WeightedEdge>& edges,
                           WeightedDigraph::Options opts = {}) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
  return WeightedDigraph(names, std::vector<bool>(n, true), edges, opts);
}

WeightedDigraph figure7() {
  const std::vector<std::string> names{"a", "b", "c", "d"};
  return WeightedDigraph(names, std::vector<bool>(4, true),
                         {{0, 1, 10}, {1, 2, 10}, {2, 0, 10}, {0, 3, 100}, {3, 2, 0.1}, {2, 1, 10}});
}

/// Brute-force oracle: every simple path from the smallest node of the cycle.
std::set<Cycle> brute_force_cycles(const WeightedDigraph& g) {
  std::set<Cycle> out;
  const int n = static_cast<int>(g.node_count());
  std::vector<int> path;
  std::vector<char> used(n, 0);
  std::function<void(int, int)> walk = [&](int start, int v) {
    for (const auto& arc : g.outbound(v)) {
      if (arc.dst == start) {
        Cycle c;
        for (int u : path) c.push_back(g.name(u));
        out.insert(canonical_form(c));
      } else if (arc.dst > start && !used[arc.dst]) {
        used[arc.dst] = 1;
        path.push_back(arc.dst);
        walk(start, arc.dst);
        path.pop_back();
        used[arc.dst] = 0;
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    path = {s};
    used.assign(n, 0);
    used[s] = 1;
    walk(s, s);
  }
  return out;
}

struct Scored {
  Model model;
  RunResult run;
  LinkScoreSeries series;
  explicit Scored(Model m) : model(std::move(m)), run(simulate(model)), series(score_all(model, run)) {}
};

}  // namespace

TEST_CASE("canonical form rotates to the smallest name") {
  CHECK(canonical_form(Cycle{"F1", "S1"}) == Cycle{"F1", "S1"});
  CHECK(canonical_form(Cycle{"S1", "F2", "S2", "F1"}) == Cycle{"F1", "S1", "F2", "S2"});
  CHECK_THROWS_AS(canonical_form(Cycle{"a", "b", "a"}), MalformedCycle);
  CHECK_THROWS_AS(canonical_form(Cycle{}), MalformedCycle);
}

TEST_CASE("catalog deduplicates rotations") {
  LoopCatalog c;
  CHECK(c.insert({{"b", "c", "a"}, 2.0, 1}));
  CHECK_FALSE(c.insert({{"a", "b", "c"}, 3.0, 2}));
  CHECK_FALSE(c.insert({{"c", "a", "b"}, 3.0, 2}));
  CHECK(c.insert({{"a", "c", "b"}, 3.0, 2}));  // opposite direction is a different loop
  REQUIRE(c.size() == 2);
  CHECK(c.records()[0].cycle == Cycle{"a", "b", "c"});
  CHECK(c.records()[0].discovery_score == 2.0);
  CHECK(c.contains(Cycle{"c", "a", "b"}));
}

TEST_CASE("weighted digraph sorts outbound arcs by magnitude, stably") {
  const auto g = graph_from(4, {{0, 1, 0.5}, {0, 2, -2.0}, {0, 3, 0.5}, {1, 0, 0.0}});
  const auto out = g.outbound(0);
  REQUIRE(out.size() == 3);
  CHECK(out[0].dst == 2);
  CHECK(out[1].dst == 1);
  CHECK(out[2].dst == 3);
  CHECK(g.outbound(1).empty());  // zero weight pruned
  CHECK(g.edge_count() == 3);
  const auto raw = graph_from(4, {{0, 1, 0.5}, {0, 2, -2.0}}, {false, false});
  CHECK(raw.outbound(0)[0].dst == 1);
  CHECK_THROWS(graph_from(2, {{0, 1, 1}, {0, 1, 2}}));
  CHECK_THROWS(graph_from(2, {{0, 5, 1}}));
  CHECK_THROWS(graph_from(2, {{0, 1, NAN}}));
}

TEST_CASE("fixture loop inventories") {
  const auto two = enumerate_loops(dependency_graph(testing::fixture_model("twostock")), 1000);
  CHECK(cycles_of(two) == std::set<Cycle>{{"Flow_1", "Stock_1"},
                                          {"Flow_2", "Stock_2"},
                                          {"Flow_1", "Stock_1", "Flow_2", "Stock_2"}});
  CHECK(two.provenance() == Provenance::Exhaustive);
  CHECK_FALSE(two.overflow());

  const auto arms = enumerate_loops(dependency_graph(testing::fixture_model("armsrace")), 1000);
  CHECK(arms.size() == 8);
  std::map<std::size_t, int> by_length;
  for (const auto& r : arms.records()) ++by_length[r.cycle.size()];
  CHECK(by_length == std::map<std::size_t, int>{{2, 3}, {6, 3}, {9, 2}});

  const auto f7 = enumerate_loops(figure7(), 1000);
  CHECK(cycles_of(f7) == std::set<Cycle>{{"a", "b", "c"}, {"a", "d", "c"}, {"b", "c"}});
  for (const auto& r : f7.records()) {
    if (r.cycle == Cycle{"a", "b", "c"}) CHECK(r.discovery_score == 1000.0);
    if (r.cycle == Cycle{"a", "d", "c"}) CHECK(r.discovery_score == doctest::Approx(100.0));
    CHECK_FALSE(r.found_at.has_value());
  }
}

TEST_CASE("acyclic graphs and self loops") {
  CHECK(enumerate_loops(graph_from(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}), 10).empty());
  const auto self = enumerate_loops(graph_from(2, {{0, 0, 0.5}, {0, 1, 1}, {1, 0, 1}}), 10);
  CHECK(cycles_of(self) == std::set<Cycle>{{"n0"}, {"n0", "n1"}});
}

TEST_CASE("Johnson enumeration matches a brute-force oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    std::vector<WeightedEdge> edges;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (rng() % 100 < 45) edges.push_back({a, b, 1.0 + static_cast<double>(rng() % 5)});
    const auto g = graph_from(n, edges);
    const auto found = enumerate_loops(g, 100000);
    CHECK(cycles_of(found) == brute_force_cycles(g));
    CHECK(found.size() == cycles_of(found).size());
    for (const auto& r : found.records()) {
      double product = 1.0;
      for (std::size_t i = 0; i < r.cycle.size(); ++i)
        product *= *g.weight(*g.index_of(r.cycle[i]), *g.index_of(r.cycle[(i + 1) % r.cycle.size()]));
      CHECK(r.discovery_score == doctest::Approx(product));
    }
  }
}

TEST_CASE("enumeration stops at the cap and flags overflow") {
  std::vector<WeightedEdge> edges;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      if (a != b) edges.push_back({a, b, 1.0});
  const auto g = graph_from(6, edges);
  CHECK(enumerate_loops(g, 100000).size() == 409);  // sum C(6,k)(k-1)!
  const auto capped = enumerate_loops(g, 50);
  CHECK(capped.size() == 50);
  CHECK(capped.overflow());
  const auto exact = enumerate_loops(g, 409);
  CHECK(exact.size() == 409);
  CHECK_FALSE(exact.overflow());
}

TEST_CASE("strongest path misses the strongest figure7 loop from a") {
  LoopCatalog reg(Provenance::StrongestPath);
  const auto g = figure7();
  const int a = *g.index_of("a");
  strongest_path_pass(g, reg, std::nullopt, std::span<const int>(&a, 1));
  REQUIRE(reg.size() == 1);
  CHECK(reg.records()[0].cycle == Cycle{"a", "d", "c"});
  CHECK(reg.records()[0].discovery_score == doctest::Approx(100.0));
}

TEST_CASE("strongest path on trivial graphs") {
  LoopCatalog reg;
  const WeightedDigraph sf({"F", "S"}, {false, true}, {{0, 1, 1.0}, {1, 0, 1.0}});
  strongest_path_pass(sf, reg, 3);
  REQUIRE(reg.size() == 1);
  CHECK(reg.records()[0].discovery_score == 1.0);
  CHECK(reg.records()[0].found_at == std::optional<std::size_t>{3});

  LoopCatalog none;
  const WeightedDigraph zero({"F", "S"}, {false, true}, {{0, 1, 0.0}, {1, 0, 0.0}},
                             {true, false});
  strongest_path_pass(zero, none, 1);
  CHECK(none.empty());
}

TEST_CASE("strongest path survives a 10,000-node ring") {
  const int n = 10000;
  std::vector<WeightedEdge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  const auto g = graph_from(n, edges);
  LoopCatalog reg;
  const int start = 0;
  strongest_path_pass(g, reg, std::nullopt, std::span<const int>(&start, 1));
  CHECK(reg.size() == 1);
  CHECK(reg.records()[0].cycle.size() == static_cast<std::size_t>(n));
  CHECK(enumerate_loops(g, 10).size() == 1);
}

TEST_CASE("strongest path finds a subset of the true loops with bounded scores") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 5);
    std::vector<WeightedEdge> edges;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (rng() % 100 < 50)
          edges.push_back({a, b, (static_cast<double>(rng() % 2001) - 1000.0) / 1000.0});
    const auto g = graph_from(n, edges);
    const auto all = cycles_of(enumerate_loops(g, 100000));
    LoopCatalog reg;
    const auto stats = strongest_path_pass(g, reg, 1);
    CHECK(stats.expansions <= stats.calls);
    for (const auto& r : reg.records()) {
      CHECK(all.count(r.cycle) == 1);
      CHECK(std::fabs(r.discovery_score) <= 1.0);  // |w| <= 1 cannot grow a product
    }
    // A second identical pass adds nothing.
    const auto before = reg.size();
    strongest_path_pass(g, reg, 1);
    CHECK(reg.size() == before);
  }
}

TEST_CASE("discover uses exhaustive search for small fixtures") {
  const Scored two(testing::fixture_model("twostock"));
  const auto d = discover(two.series, {});
  CHECK(d.catalog.provenance() == Provenance::Exhaustive);
  CHECK(d.catalog.size() == 3);

  const Scored arms(testing::fixture_model("armsrace"));
  CHECK(discover(arms.series, {}).catalog.size() == 8);

  DiscoveryConfig heuristic;
  heuristic.method = DiscoveryMethod::StrongestPath;
  const auto h = discover(two.series, heuristic);
  CHECK(h.catalog.provenance() == Provenance::StrongestPath);
  CHECK(cycles_of(h.catalog) == std::set<Cycle>{{"Flow_1", "Stock_1"}, {"Flow_2", "Stock_2"}});
  CHECK(h.passes == 12);
}

TEST_CASE("discover falls back to strongest path when the cap overflows") {
  const Scored dense(testing::parse_ok(gen_synthetic({6, 1.0, 3, 30})));
  DiscoveryConfig cfg;
  cfg.cap = 100;
  const auto d = discover(dense.series, cfg);
  CHECK(d.catalog.provenance() == Provenance::StrongestPath);
  CHECK(d.catalog.overflow());
  CHECK(d.passes == 30);
  const auto truth = cycles_of(enumerate_loops(dense.series.graph, 100000));
  CHECK(truth.size() == 409 + 6);  // K6 circuits plus one minor loop per stock
  for (const auto& r : d.catalog.records()) CHECK(truth.count(r.cycle) == 1);

  cfg.method = DiscoveryMethod::Exhaustive;
  try {
    discover(dense.series, cfg);
    FAIL("expected CapExceeded");
  } catch (const CapExceeded& e) {
    CHECK(e.partial() == 100);
  }
}

TEST_CASE("discovered loops are genuine circuits through a stock") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scored s(testing::parse_ok(gen_synthetic({5, 0.5, seed, 20})));
    DiscoveryConfig cfg;
    cfg.method = DiscoveryMethod::StrongestPath;
    const auto found = discover(s.series, cfg);
    for (const auto& r : found.catalog.records()) {
      bool stock = false;
      for (std::size_t i = 0; i < r.cycle.size(); ++i) {
        const auto a = s.series.graph.index_of(r.cycle[i]);
        const auto b = s.series.graph.index_of(r.cycle[(i + 1) % r.cycle.size()]);
        CHECK(s.series.graph.find_edge(*a, *b).has_value());
        stock = stock || s.series.graph.is_stock(*a);
      }
      CHECK(stock);
    }
  }
}

TEST_CASE("threaded discovery matches the sequential result") {
  const Scored s(testing::parse_ok(gen_synthetic({7, 1.0, 5, 40})));
  DiscoveryConfig cfg;
  cfg.method = DiscoveryMethod::StrongestPath;
  const auto one = discover(s.series, cfg);
  cfg.threads = 4;
  const auto four = discover(s.series, cfg);
  CHECK(one.catalog.records() == four.catalog.records());
  CHECK(one.stats.calls == four.stats.calls);
  CHECK(one.stats.loops_found == four.stats.loops_found);

  // Doubling the passes (stride 1 after stride 2) never duplicates loops.
  cfg.threads = 1;
  cfg.stride = 2;
  const auto half = discover(s.series, cfg);
  for (const auto& r : half.catalog.records()) CHECK(one.catalog.contains(r.cycle));
}

TEST_CASE("eight fully coupled stocks have 16072 circuits") {
  const Model m = testing::parse_ok(gen_synthetic({8, 1.0, 1, 10}));
  const auto all = enumerate_loops(dependency_graph(m), 100000);
  CHECK(all.size() == 16072);
  CHECK(enumerate_loops(dependency_graph(m), 1000).overflow());
}
