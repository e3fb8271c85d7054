#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopdom/model.hpp"

namespace loopdom {

/// Dense record of an Euler run: every variable at every step t_0..t_n.
struct RunResult {
  RunSpec spec;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // [variable][step]
  // [variable][step * if_count + slot]; Unreached marks IF nodes nested in
  // an untaken branch.
  std::vector<std::vector<Branch>> branches;
  std::vector<int> if_counts;

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  double dt() const { return spec.dt; }
  double value(int var, std::size_t step) const { return values[var][step]; }
  std::span<const Branch> branches_at(int var, std::size_t step) const;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::string variable, std::size_t step, SourceLoc loc, const std::string& what);

  const std::string& variable() const { return variable_; }
  std::size_t step() const { return step_; }
  SourceLoc loc() const { return loc_; }

 private:
  std::string variable_;
  std::size_t step_;
  SourceLoc loc_;
};

/// Auxiliaries and flows in dependency order, ties broken by declaration
/// order. Requires a validated model.
std::vector<int> evaluation_order(const Model& model);
std::vector<std::string> evaluation_order_names(const Model& model);

RunResult simulate(const Model& model, const RunSpec& spec);
inline RunResult simulate(const Model& model) { return simulate(model, model.run_spec()); }

/// dt * (sum of inflows - sum of outflows) at step k: the exact increment
/// applied to the stock between t_k and t_{k+1}.
double stock_increment(const Model& model, const RunResult& run, int stock, std::size_t k);

/// Header `time,var1,...`; shortest round-trip decimal rendering.
void write_csv(std::ostream& out, const Model& model, const RunResult& run);

std::string format_double(double v);

}  // namespace loopdom
