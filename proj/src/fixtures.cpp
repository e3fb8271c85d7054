#include "loopdom/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "loopdom/simulate.hpp"

namespace loopdom {

namespace {

constexpr std::string_view kTwoStock = R"(# Two stocks whose minor loops alternately drive the other stock's flow.
SPEC START = 0 STOP = 12 DT = 1

FLOW Flow_1 = IF Stock_2 > 50 THEN Stock_2 / DT ELSE Stock_1 / DT
FLOW Flow_2 = IF Stock_1 > 10 AND Stock_1 < 20 THEN Stock_1 / DT ELSE Stock_2 / DT

STOCK Stock_1 = 1 { inflow: Flow_1 }
STOCK Stock_2 = 1 { inflow: Flow_2 }
)";

constexpr std::string_view kArmsRace = R"(# Three-party arms race: each party adjusts toward a target set by the others.
SPEC START = 0 STOP = 100 DT = 1

CONST tau = 5

AUX target_A = B + 0.9 * C
AUX target_B = A + 1.1 * C
AUX target_C = 1.1 * A + 0.9 * B

FLOW change_A = (target_A - A) / tau
FLOW change_B = (target_B - B) / tau
FLOW change_C = (target_C - C) / tau

STOCK A = 50 { inflow: change_A }
STOCK B = 100 { inflow: change_B }
STOCK C = 150 { inflow: change_C }
)";

constexpr std::string_view kFigure7 = R"(src,dst,weight
a,b,10
b,c,10
c,a,10
a,d,100
d,c,0.1
c,b,10
)";

std::vector<Fixture> build() {
  return {
      {"twostock", "twostock.sdm", FixtureKind::Model, std::string(kTwoStock),
       "Flow equations are given verbatim. Initial values of 1 are given. "
       "DT = 1 is given. The 0..12 horizon is reconstructed: it is the run length "
       "under which the stated average link scores (0.5, 0.9, 0.1, 0.5) emerge."},
      {"armsrace", "armsrace.sdm", FixtureKind::Model, std::string(kArmsRace),
       "Initial values A=50, B=100, C=150 are given. The additive target form and "
       "its coefficients are reconstructed so the pairwise loop gains are 1, 0.99 "
       "and 0.99. tau = 5, DT = 1 and the 0..100 horizon are reconstructed."},
      {"figure7", "figure7.csv", FixtureKind::EdgeList, std::string(kFigure7),
       "Topology is given. Weights are reconstructed so that the path products "
       "a->d = 100, a->d->c = 10, a->d->c->b = 100 and the loop scores "
       "a->b->c->a = 1000, a->d->c->a = 100 all hold."},
  };
}

std::string stock_name(std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i + 1);
  return "S" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

const std::vector<Fixture>& fixtures() {
  static const std::vector<Fixture> all = build();
  return all;
}

const Fixture* find_fixture(std::string_view name) {
  for (const auto& f : fixtures())
    if (f.name == name) return &f;
  return nullptr;
}

std::string gen_synthetic(const SyntheticSpec& spec) {
  if (spec.stocks < 2) throw std::invalid_argument("stocks must be at least 2");
  if (!(spec.density > 0.0 && spec.density <= 1.0))
    throw std::invalid_argument("density must be in (0, 1]");
  if (spec.steps < 1) throw std::invalid_argument("steps must be at least 1");

  // Raw engine output only: distribution classes differ across standard
  // libraries and would break cross-platform determinism.
  std::mt19937_64 rng(spec.seed);
  auto below = [&](std::uint64_t n) { return rng() % n; };
  auto coefficient = [&] {
    std::int64_t v = 0;
    while (v == 0) v = static_cast<std::int64_t>(below(2001)) - 1000;
    return static_cast<double>(v) / 1000.0;
  };

  const std::size_t n = spec.stocks;
  const std::size_t width = std::to_string(n).size() < 2 ? 2 : std::to_string(n).size();
  const auto others =
      static_cast<std::size_t>(std::ceil(spec.density * static_cast<double>(n - 1) - 1e-12));

  std::ostringstream out;
  out << "# synthetic: stocks=" << n << " density=" << format_double(spec.density)
      << " seed=" << spec.seed << "\n";
  out << "SPEC START = 0 STOP = " << spec.steps << " DT = 1\n\n";

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> pool;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) pool.push_back(j);
    for (std::size_t j = pool.size(); j > 1; --j) std::swap(pool[j - 1], pool[below(j)]);
    pool.resize(others);
    std::sort(pool.begin(), pool.end());
    pool.insert(pool.begin(), i);

    out << "FLOW F" << stock_name(i, width).substr(1) << " =";
    for (std::size_t t = 0; t < pool.size(); ++t) {
      const double c = coefficient();
      if (t == 0)
        out << ' ' << format_double(c);
      else
        out << (c < 0 ? " - " : " + ") << format_double(std::fabs(c));
      out << " * " << stock_name(pool[t], width);
    }
    out << '\n';
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    const auto init = 1 + below(10);
    out << "STOCK " << stock_name(i, width) << " = " << init << " { inflow: F"
        << stock_name(i, width).substr(1) << " }\n";
  }
  return out.str();
}

}  // namespace loopdom
