#include <iostream>

#include "CLI11.hpp"
#include "loopdom/commands.hpp"

namespace cli = loopdom::cli;

int main(int argc, char** argv) {
  CLI::App app{"Feedback loop dominance analysis for stock-and-flow models"};
  app.require_subcommand(1);
  int code = cli::kOk;

  cli::SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a model and print every variable as CSV");
  simulate->add_option("model", sim.model, "Model file")->required();
  simulate->add_option("--start", sim.start, "Override start time");
  simulate->add_option("--stop", sim.stop, "Override stop time");
  simulate->add_option("--dt", sim.dt, "Override time step");
  simulate->add_option("--out", sim.out, "Output path (default stdout)");
  simulate->callback([&] { code = cli::run_simulate(sim, std::cout, std::cerr); });

  cli::AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "Discover, score and rank feedback loops");
  analyze->add_option("model", an.model, "Model file")->required();
  analyze->add_option("--method", an.method, "auto | exhaustive | strongest-path")
      ->check(CLI::IsMember({"auto", "exhaustive", "strongest-path"}));
  analyze->add_option("--cap", an.cap, "Exhaustive loop cap")->check(CLI::PositiveNumber);
  analyze->add_option("--stride", an.stride, "Steps between strongest-path passes")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--threshold", an.threshold, "Minimum average contribution, in [0, 1)");
  analyze->add_option("--top", an.top, "Keep at most this many loops");
  analyze->add_option("--threads", an.threads, "Worker threads for strongest-path passes")
      ->check(CLI::PositiveNumber);
  analyze->add_flag("--unsorted", an.unsorted, "Do not sort outbound links by score");
  analyze->add_option("--out", an.out, "Ranking JSON path (default stdout)");
  analyze->add_option("--csv", an.csv, "Analysis CSV path");
  analyze->add_option("--catalog", an.catalog, "Loop catalog JSON path");
  analyze->add_option("--scores", an.scores, "Link score CSV path");
  analyze->callback([&] { code = cli::run_analyze(an, std::cout, std::cerr); });

  cli::GraphLoopsOptions gl;
  auto* graph = app.add_subcommand("graph-loops", "Find loops in a static weighted edge list");
  graph->add_option("edges", gl.edges, "CSV with header src,dst,weight")->required();
  graph->add_option("--start", gl.start, "Start node for strongest-path, or 'all'");
  graph->add_option("--method", gl.method, "auto | exhaustive | strongest-path")
      ->check(CLI::IsMember({"auto", "exhaustive", "strongest-path"}));
  graph->add_option("--cap", gl.cap, "Exhaustive loop cap")->check(CLI::PositiveNumber);
  graph->add_option("--out", gl.out, "Output path (default stdout)");
  graph->callback([&] { code = cli::run_graph_loops(gl, std::cout, std::cerr); });

  cli::GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic linear model");
  gen_cmd->add_option("--stocks", gen.stocks, "Number of stocks (>= 2)");
  gen_cmd->add_option("--density", gen.density, "Fraction of other stocks read by each flow");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--steps", gen.steps, "Run length");
  gen_cmd->add_option("--out", gen.out, "Output path (default stdout)");
  gen_cmd->callback([&] { code = cli::run_gen(gen, std::cout, std::cerr); });

  cli::CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Check a candidate catalog against a reference");
  compare->add_option("reference", cmp.reference, "Reference catalog JSON")->required();
  compare->add_option("candidate", cmp.candidate, "Candidate catalog JSON")->required();
  auto* model_opt = compare->add_option("--model", cmp.model, "Model that scores the loops");
  auto* edges_opt = compare->add_option("--edges", cmp.edges, "Static edge list that scores the loops");
  model_opt->excludes(edges_opt);
  compare->add_option("--top", cmp.top, "Reference loops to check");
  compare->add_option("--near-miss", cmp.near_miss, "Common-segment ratio that flags a near miss");
  compare->add_option("--out", cmp.out, "Output path (default stdout)");
  compare->callback([&] { code = cli::run_compare(cmp, std::cout, std::cerr); });

  cli::FixtureOptions fx;
  auto* fixture = app.add_subcommand("fixture", "List or print a bundled fixture");
  fixture->add_option("name", fx.name, "Fixture name; omit to list");
  fixture->add_flag("--notes", fx.notes, "Print provenance notes instead of the source");
  fixture->add_option("--out", fx.out, "Output path (default stdout)");
  fixture->callback([&] { code = cli::run_fixture(fx, std::cout, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kUsage;
  }
  return code;
}
