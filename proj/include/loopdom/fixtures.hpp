#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace loopdom {

enum class FixtureKind { Model, EdgeList };

struct Fixture {
  std::string name;
  std::string filename;
  FixtureKind kind;
  std::string text;
  std::string notes;  // which values are given and which are reconstructed
};

const std::vector<Fixture>& fixtures();
/// nullptr if unknown.
const Fixture* find_fixture(std::string_view name);

struct SyntheticSpec {
  std::size_t stocks = 2;
  double density = 1.0;  // fraction of the other stocks each flow reads
  std::uint64_t seed = 1;
  std::size_t steps = 100;
};

/// N stocks S01.. with one net inflow each; F_i is a linear combination of
/// S_i and ceil(density * (N - 1)) other stocks with nonzero coefficients in
/// [-1, 1] (three decimals). Same spec gives byte-identical text. Throws
/// std::invalid_argument unless stocks >= 2 and density is in (0, 1].
std::string gen_synthetic(const SyntheticSpec& spec);

}  // namespace loopdom
