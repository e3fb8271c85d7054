#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "loopdom/analysis.hpp"
#include "support.hpp"

using namespace loopdom;

namespace {

using Cycle = std::vector<std::string>;

struct Scored {
  Model model;
  RunResult run;
  LinkScoreSeries series;
  LoopCatalog catalog;
  explicit Scored(Model m)
      : model(std::move(m)),
        run(simulate(model)),
        series(score_all(model, run)),
        catalog(enumerate_loops(series.graph, 1000)) {}
};

void check_normalized(const LoopCatalog& catalog, const LinkScoreSeries& series) {
  const auto rel = relative_scores(catalog, series);
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    double sum = 0.0;
    bool active = false;
    for (std::size_t i = 0; i < rel.size(); ++i) {
      CHECK(rel[i][k] >= 0.0);
      CHECK(rel[i][k] <= 1.0);
      sum += rel[i][k];
      active = active || loop_score_series(catalog.records()[i].cycle, series)[k] != 0.0;
    }
    CHECK(std::fabs(sum - (active ? 1.0 : 0.0)) <= 1e-12);
  }
}

}  // namespace

TEST_CASE("two-stock loop scores") {
  const Scored s(testing::fixture_model("twostock"));
  const auto long_loop = loop_score_series(Cycle{"Flow_1", "Stock_1", "Flow_2", "Stock_2"}, s.series);
  for (double v : long_loop) CHECK(v == 0.0);
  const auto minor = loop_score_series(Cycle{"Flow_1", "Stock_1"}, s.series);
  const int f1 = *s.model.index_of("Flow_1");
  for (std::size_t k = 1; k <= 12; ++k) {
    const bool own = s.run.branches_at(f1, k - 1)[0] == Branch::Else;
    CHECK(minor[k] == (own ? 1.0 : 0.0));
  }
  CHECK_THROWS_AS(loop_score_series(Cycle{"Stock_1", "Stock_2"}, s.series), std::invalid_argument);
}

TEST_CASE("loop score is the product of link scores") {
  Digraph g({"x", "y"}, {true, false}, {{0, 1, EdgeKind::Dependency}, {1, 0, EdgeKind::Dependency}});
  const auto series = static_series(g, {-0.5, 1.0});
  CHECK(loop_score_series(Cycle{"x", "y"}, series)[1] == -0.5);
}

TEST_CASE("relative scores are normalized on fixtures and synthetics") {
  for (const char* name : {"twostock", "armsrace"}) {
    const Scored s(testing::fixture_model(name));
    check_normalized(s.catalog, s.series);
  }
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Scored s(testing::parse_ok(gen_synthetic({4, 0.7, seed, 30})));
    check_normalized(s.catalog, s.series);
  }
}

TEST_CASE("single active loop takes the whole share") {
  const Scored s(testing::parse_ok(
      "SPEC START = 0 STOP = 5 DT = 1\nFLOW f = 0.5 * s\nSTOCK s = 1 { inflow: f }\n"));
  REQUIRE(s.catalog.size() == 1);
  const auto rel = relative_scores(s.catalog, s.series);
  for (std::size_t k = 1; k <= 5; ++k) CHECK(rel[0][k] == 1.0);
  CHECK(rel[0][0] == 0.0);
}

TEST_CASE("relative scores survive magnitudes beyond double range") {
  // Two 400-edge loops whose products are 1e800 and 1e799.
  const int n = 400;
  std::vector<std::string> names;
  std::vector<Edge> edges;
  std::vector<double> weights;
  for (int i = 0; i < 2 * n; ++i) names.push_back("v" + std::to_string(1000 + i));
  for (int i = 0; i < n; ++i) {
    edges.push_back({i, (i + 1) % n, EdgeKind::Dependency});
    weights.push_back(100.0);
    edges.push_back({n + i, n + (i + 1) % n, EdgeKind::Dependency});
    weights.push_back(i == 0 ? 10.0 : 100.0);
  }
  const Digraph g(names, std::vector<bool>(2 * n, true), edges);
  const auto series = static_series(g, weights);
  const auto catalog = enumerate_loops(g, 10);
  REQUIRE(catalog.size() == 2);
  const auto rel = relative_scores(catalog, series);
  const double big = rel[0][1] > rel[1][1] ? rel[0][1] : rel[1][1];
  CHECK(big == doctest::Approx(10.0 / 11.0));
  CHECK(rel[0][1] + rel[1][1] == doctest::Approx(1.0));
}

TEST_CASE("rank and filter") {
  const Scored two(testing::fixture_model("twostock"));
  const auto all = rank_and_filter(two.catalog, two.series, 0.0);
  REQUIRE(all.size() == 3);
  for (std::size_t i = 1; i < all.size(); ++i)
    CHECK(all[i - 1].avg_contribution >= all[i].avg_contribution);
  const auto kept = rank_and_filter(two.catalog, two.series, 0.001);
  REQUIRE(kept.size() == 2);
  for (const auto& p : kept) CHECK(p.loop.cycle.size() == 2);
  CHECK(rank_and_filter(two.catalog, two.series, 0.0, 1).size() == 1);
  CHECK_THROWS(rank_and_filter(two.catalog, two.series, 1.0));

  const Scored arms(testing::fixture_model("armsrace"));
  const auto arms_kept = rank_and_filter(arms.catalog, arms.series, 0.001);
  CHECK(arms_kept.size() >= 7);
  double total = 0.0;
  for (const auto& p : rank_and_filter(arms.catalog, arms.series, 0.0)) {
    CHECK(p.avg_contribution <= 1.0);
    total += p.avg_contribution;
  }
  CHECK(total == doctest::Approx(1.0));  // some loop is active at every step 1..n
}

TEST_CASE("arms-race polarities") {
  const Scored s(testing::fixture_model("armsrace"));
  const auto ps = profile_loops(s.catalog, s.series);
  int balancing = 0, reinforcing = 0;
  for (const auto& p : ps) {
    if (p.loop.cycle.size() == 2) CHECK(p.polarity == Polarity::Balancing);
    if (p.loop.cycle.size() > 2) CHECK(p.polarity == Polarity::Reinforcing);
    balancing += p.polarity == Polarity::Balancing;
    reinforcing += p.polarity == Polarity::Reinforcing;
  }
  CHECK(balancing == 3);
  CHECK(reinforcing == 5);
}

TEST_CASE("polarity follows constant edge signs; never-active loops are mixed") {
  Digraph g({"x", "y", "z"}, {true, false, false},
            {{0, 1, EdgeKind::Dependency}, {1, 2, EdgeKind::Dependency}, {2, 0, EdgeKind::Dependency}});
  for (double a : {-1.0, 1.0})
    for (double b : {-0.5, 0.5}) {
      const auto series = static_series(g, {a, b, 2.0});
      LoopCatalog c;
      c.insert({{"x", "y", "z"}, 0, std::nullopt});
      const auto p = profile_loops(c, series)[0];
      CHECK(p.polarity == (a * b > 0 ? Polarity::Reinforcing : Polarity::Balancing));
    }
  const auto dead = static_series(g, {1.0, 0.0, 1.0});
  LoopCatalog c;
  c.insert({{"x", "y", "z"}, 0, std::nullopt});
  const auto p = profile_loops(c, dead)[0];
  CHECK(p.polarity == Polarity::Mixed);
  CHECK_FALSE(p.ever_active);

  LoopProfile flip;
  flip.score_series = {0, 1, -1};
  CHECK(classify_polarity(flip) == Polarity::Mixed);
}

TEST_CASE("common segment ratio") {
  CHECK(common_segment_ratio(Cycle{"a", "b", "c"}, Cycle{"a", "b", "c"}) == 1.0);
  CHECK(common_segment_ratio(Cycle{"a", "b", "c"}, Cycle{"b", "c", "a"}) == 1.0);
  CHECK(common_segment_ratio(Cycle{"a", "b", "c", "d"}, Cycle{"a", "x", "c", "d"}) == 0.75);
  CHECK(common_segment_ratio(Cycle{"a", "b"}, Cycle{"c", "d"}) == 0.0);
  CHECK(common_segment_ratio(Cycle{"a", "b", "c", "d", "e"}, Cycle{"a", "b"}) == 0.4);
}

TEST_CASE("compare catalogs") {
  const Scored two(testing::fixture_model("twostock"));
  const auto same = compare_catalogs(two.catalog, two.catalog, two.series, 5);
  CHECK(same.intersection == two.catalog.size());
  CHECK(same.top.size() == 3);
  for (const auto& t : same.top) CHECK(t.present);
  CHECK(same.near_misses.empty());

  DiscoveryConfig heuristic;
  heuristic.method = DiscoveryMethod::StrongestPath;
  const auto h = discover(two.series, heuristic).catalog;
  // The long loop never has all links active at one step, so per-step
  // passes over pruned graphs cannot reach it.
  const auto vs = compare_catalogs(two.catalog, h, two.series, 3);
  CHECK(vs.candidate_size == 2);
  CHECK(vs.intersection == 2);
  REQUIRE(vs.top.size() == 3);
  CHECK(vs.top[0].present);
  CHECK(vs.top[1].present);
  CHECK_FALSE(vs.top[2].present);
  CHECK(vs.top[2].avg_contribution == 0.0);

  Digraph g({"a", "b", "c", "d"}, std::vector<bool>(4, true),
            {{0, 1, EdgeKind::Dependency}, {1, 2, EdgeKind::Dependency}, {2, 0, EdgeKind::Dependency},
             {0, 3, EdgeKind::Dependency}, {3, 2, EdgeKind::Dependency}, {2, 1, EdgeKind::Dependency}});
  const auto series = static_series(g, {10, 10, 10, 100, 0.1, 10});
  LoopCatalog reference;
  reference.insert({{"a", "b", "c"}, 1000, std::nullopt});
  reference.insert({{"a", "d", "c"}, 100, std::nullopt});
  LoopCatalog candidate(Provenance::StrongestPath);
  candidate.insert({{"a", "d", "c"}, 100, std::nullopt});
  const auto report = compare_catalogs(reference, candidate, series, 1);
  REQUIRE(report.top.size() == 1);
  CHECK(report.top[0].cycle == Cycle{"a", "b", "c"});
  CHECK_FALSE(report.top[0].present);
  CHECK(report.intersection == 1);

  LoopCatalog stranger;
  stranger.insert({{"a", "z"}, 1, std::nullopt});
  CHECK_THROWS_AS(compare_catalogs(reference, stranger, series, 1), std::invalid_argument);
}

TEST_CASE("near misses pair loops with long shared segments") {
  const int n = 6;
  std::vector<std::string> names{"a", "b", "c", "d", "e", "x"};
  std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 5}, {5, 3}};
  const Digraph g(names, std::vector<bool>(n, true), edges);
  const auto series = static_series(g, std::vector<double>(edges.size(), 1.0));
  LoopCatalog ref;
  ref.insert({{"a", "b", "c", "d", "e"}, 1, std::nullopt});
  LoopCatalog cand;
  cand.insert({{"a", "b", "x", "d", "e"}, 1, std::nullopt});
  const auto report = compare_catalogs(ref, cand, series, 1);
  REQUIRE(report.near_misses.size() == 1);
  CHECK(report.near_misses[0].ratio == doctest::Approx(0.8));  // d, e, a, b
  CHECK(compare_catalogs(ref, cand, series, 1, 0.9).near_misses.empty());
}

TEST_CASE("static loop gains of the arms race") {
  const Scored s(testing::fixture_model("armsrace"));
  const auto ps = profile_loops(s.catalog, s.series);
  std::vector<double> minor, pairwise, three;
  for (const auto& p : ps) {
    const double g = static_loop_gain(s.model, s.run, p.loop.cycle);
    (p.loop.cycle.size() == 2 ? minor : p.loop.cycle.size() == 6 ? pairwise : three).push_back(g);
  }
  std::sort(pairwise.begin(), pairwise.end());
  std::sort(three.begin(), three.end());
  REQUIRE(minor.size() == 3);
  REQUIRE(pairwise.size() == 3);
  REQUIRE(three.size() == 2);
  for (double g : minor) CHECK(g == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::fabs(pairwise[0] - 0.99) <= 1e-12);
  CHECK(std::fabs(pairwise[1] - 0.99) <= 1e-12);
  CHECK(std::fabs(pairwise[2] - 1.0) <= 1e-12);
  CHECK(std::fabs(three[0] - 0.81) <= 1e-12);
  CHECK(std::fabs(three[1] - 1.21) <= 1e-12);
  CHECK_THROWS_AS(static_loop_gain(s.model, s.run, Cycle{"target_A", "change_A"}), std::domain_error);
}

TEST_CASE("analysis CSV") {
  const Scored s(testing::fixture_model("twostock"));
  const auto ranked = rank_and_filter(s.catalog, s.series, 0.0);
  std::ostringstream out;
  write_analysis_csv(out, ranked, s.series.times);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "time,loop_id,score,relative");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 13 * 3);
}
