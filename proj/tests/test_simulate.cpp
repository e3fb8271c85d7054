#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "loopdom/simulate.hpp"
#include "support.hpp"

using namespace loopdom;

TEST_CASE("two-stock run doubles both stocks while the minor loops drive them") {
  const Model m = testing::fixture_model("twostock");
  const RunResult r = simulate(m);
  REQUIRE(r.steps() == 12);
  const int s1 = *m.index_of("Stock_1");
  const int s2 = *m.index_of("Stock_2");
  for (std::size_t k = 0; k <= 12; ++k) {
    CHECK(r.value(s1, k) == std::ldexp(1.0, static_cast<int>(k)));
    CHECK(r.value(s2, k) == std::ldexp(1.0, static_cast<int>(k)));
  }
}

TEST_CASE("Euler identity holds exactly at every step") {
  for (const char* name : {"twostock", "armsrace"}) {
    const Model m = testing::fixture_model(name);
    const RunResult r = simulate(m);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.variable(static_cast<int>(i)).kind != VarKind::Stock) continue;
      const int s = static_cast<int>(i);
      for (std::size_t k = 0; k < r.steps(); ++k) {
        double net = 0.0;
        for (int f : m.inflows(s)) net += r.value(f, k);
        for (int f : m.outflows(s)) net -= r.value(f, k);
        CHECK(r.value(s, k + 1) == r.value(s, k) + r.dt() * net);
      }
    }
  }
}

TEST_CASE("a stock with zero net flow stays constant") {
  const Model m = testing::parse_ok(
      "SPEC START = 0 STOP = 5 DT = 1\nFLOW i = 2\nFLOW o = 2\nSTOCK s = 7 { inflow: i outflow: o }\n");
  const RunResult r = simulate(m);
  for (std::size_t k = 0; k <= 5; ++k) CHECK(r.value(*m.index_of("s"), k) == 7.0);
}

TEST_CASE("division by zero aborts naming the variable and step") {
  const Model m = testing::parse_ok(
      "SPEC START = 0 STOP = 3 DT = 1\n"
      "FLOW g = 1\n"
      "STOCK x = 1 { outflow: g }\n"
      "FLOW f = 1 / x\n"
      "STOCK y = 0 { inflow: f }\n");
  try {
    simulate(m);
    FAIL("expected a SimulationError");
  } catch (const SimulationError& e) {
    CHECK(e.variable() == "f");
    CHECK(e.step() == 1);
    CHECK(e.loc().line == 4);
  }
}

TEST_CASE("non-finite results abort") {
  const Model m = testing::parse_ok(
      "SPEC START = 0 STOP = 2000 DT = 1\nFLOW f = s * 10\nSTOCK s = 1 { inflow: f }\n");
  CHECK_THROWS_AS(simulate(m), SimulationError);
}

TEST_CASE("evaluation order is topological with declaration tie-breaks") {
  CHECK(evaluation_order_names(testing::fixture_model("twostock")) ==
        std::vector<std::string>{"Flow_1", "Flow_2"});
  CHECK(evaluation_order_names(testing::parse_ok("CONST c0 = 1\nAUX a = b\nAUX b = c0\n")) ==
        std::vector<std::string>{"b", "a"});
  const auto arms = evaluation_order_names(testing::fixture_model("armsrace"));
  for (std::string s : {"A", "B", "C"}) {
    const auto t = std::find(arms.begin(), arms.end(), "target_" + s);
    const auto f = std::find(arms.begin(), arms.end(), "change_" + s);
    REQUIRE(t != arms.end());
    REQUIRE(f != arms.end());
    CHECK(t < f);
  }
}

TEST_CASE("runs are bit-identical") {
  const Model m = testing::fixture_model("armsrace");
  CHECK(simulate(m) == simulate(m));
}

TEST_CASE("TIME and DT evaluate from the run spec") {
  const Model m = testing::parse_ok("SPEC START = 2 STOP = 3 DT = 0.5\nAUX t = TIME\nAUX d = DT\n");
  const RunResult r = simulate(m);
  CHECK(r.times == std::vector<double>{2.0, 2.5, 3.0});
  CHECK(r.value(0, 1) == 2.5);
  CHECK(r.value(1, 2) == 0.5);
}

TEST_CASE("branch trace covers every top-level IF at every step") {
  const Model m = testing::fixture_model("twostock");
  const RunResult r = simulate(m);
  for (const char* flow : {"Flow_1", "Flow_2"}) {
    const int f = *m.index_of(flow);
    for (std::size_t k = 0; k <= r.steps(); ++k) {
      REQUIRE(r.branches_at(f, k).size() == 1);
      CHECK(r.branches_at(f, k)[0] != Branch::Unreached);
    }
  }
  // Flow_2 reads Stock_1 only while 10 < Stock_1 < 20: at t = 4 (Stock_1 = 16).
  const int f2 = *m.index_of("Flow_2");
  for (std::size_t k = 0; k <= r.steps(); ++k)
    CHECK((r.branches_at(f2, k)[0] == Branch::Then) == (k == 4));
}

TEST_CASE("halving dt keeps branch decisions until the first threshold crossing") {
  const Model m = testing::fixture_model("twostock");
  RunSpec fine = m.run_spec();
  fine.dt = 0.5;
  const RunResult coarse_run = simulate(m);
  const RunResult fine_run = simulate(m, fine);

  // First step at which any IF differs from its step-0 branch, in model time.
  auto first_flip = [&](const RunResult& r) {
    for (std::size_t k = 1; k <= r.steps(); ++k)
      for (int v = 0; v < static_cast<int>(m.size()); ++v)
        for (std::size_t s = 0; s < r.branches_at(v, k).size(); ++s)
          if (r.branches_at(v, k)[s] != r.branches_at(v, 0)[s]) return r.times[k];
    return std::numeric_limits<double>::infinity();
  };
  const double horizon = std::min(first_flip(coarse_run), first_flip(fine_run));
  CHECK(first_flip(coarse_run) == 4.0);
  CHECK(first_flip(fine_run) == 2.0);  // Stock/DT doubles per half step
  for (std::size_t k = 0; k <= coarse_run.steps() && coarse_run.times[k] < horizon; ++k)
    for (int v = 0; v < static_cast<int>(m.size()); ++v) {
      const auto a = coarse_run.branches_at(v, k);
      const auto b = fine_run.branches_at(v, 2 * k);
      CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}

TEST_CASE("CSV export has a header and round-trips every value") {
  const Model m = testing::fixture_model("armsrace");
  const RunResult r = simulate(m);
  std::ostringstream out;
  write_csv(out, m, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "time,tau,target_A,target_B,target_C,change_A,change_B,change_C,A,B,C");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::vector<double> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      double v = 0;
      std::from_chars(line.data() + pos, line.data() + comma, v);
      cells.push_back(v);
      pos = comma + 1;
    }
    REQUIRE(cells.size() == m.size() + 1);
    CHECK(cells[0] == r.times[row]);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(cells[i + 1] == r.value(static_cast<int>(i), row));
    ++row;
  }
  CHECK(row == 101);
}
