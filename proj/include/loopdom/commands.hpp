#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace loopdom::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDiagnostics = 2, kRuntime = 3 };

struct SimulateOptions {
  std::string model;
  std::optional<double> start, stop, dt;
  std::string out;  // empty: stdout
};

struct AnalyzeOptions {
  std::string model;
  std::string method = "auto";
  std::size_t cap = 1000;
  std::size_t stride = 1;
  double threshold = 0.0;
  std::size_t top = SIZE_MAX;
  unsigned threads = 1;
  bool unsorted = false;
  std::string out;      // ranking JSON; empty: stdout
  std::string csv;      // analysis CSV
  std::string catalog;  // catalog JSON
  std::string scores;   // link score CSV
};

struct GraphLoopsOptions {
  std::string edges;
  std::string start = "all";
  std::string method = "exhaustive";
  std::size_t cap = 1000;
  std::string out;
};

struct GenOptions {
  std::size_t stocks = 2;
  double density = 1.0;
  std::uint64_t seed = 1;
  std::size_t steps = 100;
  std::string out;
};

struct CompareOptions {
  std::string reference;
  std::string candidate;
  std::string model;  // exactly one of model / edges
  std::string edges;
  std::size_t top = 15;
  double near_miss = 0.6;
  std::string out;
};

struct FixtureOptions {
  std::string name;  // empty: list
  bool notes = false;
  std::string out;
};

int run_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int run_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err);
int run_graph_loops(const GraphLoopsOptions& opts, std::ostream& out, std::ostream& err);
int run_gen(const GenOptions& opts, std::ostream& out, std::ostream& err);
int run_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err);
int run_fixture(const FixtureOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace loopdom::cli
