#include "loopdom/commands.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "loopdom/analysis.hpp"
#include "loopdom/fixtures.hpp"
#include "loopdom/io.hpp"
#include "loopdom/link_scores.hpp"
#include "loopdom/loops.hpp"
#include "loopdom/model.hpp"
#include "loopdom/simulate.hpp"

namespace loopdom::cli {

using nlohmann::json;

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Writes to `path`, or to `out` when the path is empty.
bool emit(const std::string& path, const std::string& text, std::ostream& out, std::ostream& err) {
  if (path.empty()) {
    out << text;
    return true;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) {
    err << "error: cannot write " << path << '\n';
    return false;
  }
  return true;
}

struct Loaded {
  std::optional<Model> model;
  int code = kOk;
};

Loaded load_model(const std::string& path, std::ostream& err) {
  const auto text = read_file(path);
  if (!text) {
    err << "error: file not found: " << path << '\n';
    return {std::nullopt, kUsage};
  }
  auto parsed = parse_model(*text);
  for (const auto& d : parsed.diagnostics) err << format(d, path) << '\n';
  if (!parsed.ok()) return {std::nullopt, kDiagnostics};
  const auto problems = validate(*parsed.model);
  for (const auto& d : problems) err << format(d, path) << '\n';
  if (!problems.empty()) return {std::nullopt, kDiagnostics};
  return {std::move(parsed.model), kOk};
}

std::optional<RunResult> run_model(const Model& model, const RunSpec& spec,
                                   const std::string& path, std::ostream& err) {
  try {
    return simulate(model, spec);
  } catch (const SimulationError& e) {
    err << format({Severity::Error, e.loc(), e.what()}, path) << '\n';
    return std::nullopt;
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json cycle_json(const std::vector<std::string>& cycle) { return json(cycle); }

}  // namespace

int run_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  auto loaded = load_model(opts.model, err);
  if (!loaded.model) return loaded.code;
  RunSpec spec = loaded.model->run_spec();
  if (opts.start) spec.start = *opts.start;
  if (opts.stop) spec.stop = *opts.stop;
  if (opts.dt) spec.dt = *opts.dt;
  if (auto problem = spec.problem(); !problem.empty()) {
    err << "error: " << problem << '\n';
    return kUsage;
  }
  const auto run = run_model(*loaded.model, spec, opts.model, err);
  if (!run) return kRuntime;
  std::ostringstream csv;
  write_csv(csv, *loaded.model, *run);
  return emit(opts.out, csv.str(), out, err) ? kOk : kRuntime;
}

int run_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err) {
  DiscoveryConfig config;
  if (opts.method == "auto")
    config.method = DiscoveryMethod::Auto;
  else if (opts.method == "exhaustive")
    config.method = DiscoveryMethod::Exhaustive;
  else if (opts.method == "strongest-path")
    config.method = DiscoveryMethod::StrongestPath;
  else {
    err << "error: unknown method '" << opts.method << "'\n";
    return kUsage;
  }
  if (opts.cap < 1 || opts.stride < 1) {
    err << "error: cap and stride must be at least 1\n";
    return kUsage;
  }
  if (!(opts.threshold >= 0.0 && opts.threshold < 1.0)) {
    err << "error: threshold must be in [0, 1)\n";
    return kUsage;
  }
  config.cap = opts.cap;
  config.stride = opts.stride;
  config.threads = opts.threads;
  config.sort_outbound = !opts.unsorted;

  auto loaded = load_model(opts.model, err);
  if (!loaded.model) return loaded.code;
  const Model& model = *loaded.model;
  const auto run = run_model(model, model.run_spec(), opts.model, err);
  if (!run) return kRuntime;
  const auto series = score_all(model, *run);

  DiscoveryResult found;
  try {
    found = discover(series, config);
  } catch (const CapExceeded& e) {
    err << "error: cap exceeded: " << e.partial() << " loops found before reaching the cap of "
        << opts.cap << '\n';
    return kRuntime;
  }
  const auto ranked = rank_and_filter(found.catalog, series, opts.threshold, opts.top);

  json ranking = json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& p = ranked[i];
    json entry{{"rank", i + 1},
               {"cycle", cycle_json(p.loop.cycle)},
               {"polarity", std::string(to_string(p.polarity))},
               {"avg_contribution", p.avg_contribution},
               {"discovery_score", p.loop.discovery_score},
               {"ever_active", p.ever_active}};
    if (p.loop.found_at)
      entry["found_at"] = *p.loop.found_at;
    else
      entry["found_at"] = "static";
    if (!p.ever_active) entry["note"] = "never active";
    ranking.push_back(std::move(entry));
  }

  json meta{{"model", opts.model},
            {"method", opts.method},
            {"provenance", std::string(to_string(found.catalog.provenance()))},
            {"overflow", found.catalog.overflow()},
            {"cap", opts.cap},
            {"stride", opts.stride},
            {"threshold", opts.threshold},
            {"sorted_outbound", !opts.unsorted},
            {"loops_discovered", found.catalog.size()},
            {"loops_retained", ranked.size()},
            {"passes", found.passes},
            {"search", {{"calls", found.stats.calls}, {"expansions", found.stats.expansions}}},
            {"relative_score_denominator", "discovered catalog"}};
  if (opts.top != SIZE_MAX) meta["top"] = opts.top;

  const json doc{{"metadata", std::move(meta)}, {"ranking", std::move(ranking)}};
  if (!emit(opts.out, dump(doc), out, err)) return kRuntime;
  if (!opts.catalog.empty() && !emit(opts.catalog, dump(catalog_to_json(found.catalog)), out, err))
    return kRuntime;
  if (!opts.csv.empty()) {
    std::ostringstream csv;
    write_analysis_csv(csv, ranked, series.times);
    if (!emit(opts.csv, csv.str(), out, err)) return kRuntime;
  }
  if (!opts.scores.empty()) {
    std::ostringstream csv;
    write_csv(csv, series);
    if (!emit(opts.scores, csv.str(), out, err)) return kRuntime;
  }
  return kOk;
}

int run_graph_loops(const GraphLoopsOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.method != "exhaustive" && opts.method != "strongest-path" && opts.method != "auto") {
    err << "error: unknown method '" << opts.method << "'\n";
    return kUsage;
  }
  if (opts.cap < 1) {
    err << "error: cap must be at least 1\n";
    return kUsage;
  }
  const auto text = read_file(opts.edges);
  if (!text) {
    err << "error: file not found: " << opts.edges << '\n';
    return kUsage;
  }
  const auto parsed = parse_edge_list(*text);
  for (const auto& d : parsed.diagnostics) err << format(d, opts.edges) << '\n';
  if (!parsed.ok()) return kDiagnostics;

  const auto graph = WeightedDigraph::with_weights(parsed.edges.graph, parsed.edges.weights);
  std::vector<int> starts;
  if (opts.start != "all") {
    const auto idx = graph.index_of(opts.start);
    if (!idx) {
      err << "error: unknown start node '" << opts.start << "'\n";
      return kUsage;
    }
    starts.push_back(*idx);
  }

  LoopCatalog catalog;
  bool heuristic = opts.method == "strongest-path";
  if (!heuristic) {
    catalog = enumerate_loops(graph, opts.cap);
    if (catalog.overflow()) {
      if (opts.method == "exhaustive") {
        err << "error: cap exceeded: " << catalog.size() << " loops found before reaching the cap of "
            << opts.cap << '\n';
        return kRuntime;
      }
      heuristic = true;
    }
  }
  if (heuristic) {
    const bool overflowed = catalog.overflow();
    catalog = LoopCatalog(Provenance::StrongestPath);
    catalog.set_overflow(overflowed);
    if (graph.node_count() > 0) strongest_path_pass(graph, catalog, std::nullopt, starts);
  }
  return emit(opts.out, dump(catalog_to_json(catalog)), out, err) ? kOk : kRuntime;
}

int run_gen(const GenOptions& opts, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = gen_synthetic({opts.stocks, opts.density, opts.seed, opts.steps});
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return emit(opts.out, text, out, err) ? kOk : kRuntime;
}

int run_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.model.empty() == opts.edges.empty()) {
    err << "error: exactly one of --model or --edges is required\n";
    return kUsage;
  }

  LoopCatalog catalogs[2];
  const std::string* paths[2] = {&opts.reference, &opts.candidate};
  for (int i = 0; i < 2; ++i) {
    const auto text = read_file(*paths[i]);
    if (!text) {
      err << "error: file not found: " << *paths[i] << '\n';
      return kUsage;
    }
    try {
      catalogs[i] = catalog_from_json(json::parse(*text));
    } catch (const std::exception& e) {
      err << *paths[i] << ": error: " << e.what() << '\n';
      return kDiagnostics;
    }
  }

  LinkScoreSeries series;
  if (!opts.model.empty()) {
    auto loaded = load_model(opts.model, err);
    if (!loaded.model) return loaded.code;
    const auto run = run_model(*loaded.model, loaded.model->run_spec(), opts.model, err);
    if (!run) return kRuntime;
    series = score_all(*loaded.model, *run);
  } else {
    const auto text = read_file(opts.edges);
    if (!text) {
      err << "error: file not found: " << opts.edges << '\n';
      return kUsage;
    }
    const auto parsed = parse_edge_list(*text);
    for (const auto& d : parsed.diagnostics) err << format(d, opts.edges) << '\n';
    if (!parsed.ok()) return kDiagnostics;
    series = static_series(parsed.edges.graph, parsed.edges.weights);
  }

  CompletenessReport report;
  try {
    for (const auto& rec : catalogs[0].records()) loop_score_series(rec.cycle, series);
    report = compare_catalogs(catalogs[0], catalogs[1], series, opts.top, opts.near_miss);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kDiagnostics;
  }

  json top = json::array();
  for (const auto& t : report.top)
    top.push_back({{"rank", t.rank},
                   {"cycle", cycle_json(t.cycle)},
                   {"avg_contribution", t.avg_contribution},
                   {"present", t.present}});
  json misses = json::array();
  for (const auto& m : report.near_misses)
    misses.push_back({{"reference", cycle_json(m.reference)},
                      {"candidate", cycle_json(m.candidate)},
                      {"ratio", m.ratio}});
  const json doc{{"reference_size", report.reference_size},
                 {"candidate_size", report.candidate_size},
                 {"intersection", report.intersection},
                 {"top_n", opts.top},
                 {"near_miss_ratio", opts.near_miss},
                 {"top", std::move(top)},
                 {"near_misses", std::move(misses)}};
  return emit(opts.out, dump(doc), out, err) ? kOk : kRuntime;
}

int run_fixture(const FixtureOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.name.empty()) {
    for (const auto& f : fixtures()) out << f.name << '\t' << f.filename << '\n';
    return kOk;
  }
  const Fixture* f = find_fixture(opts.name);
  if (!f) {
    err << "error: unknown fixture '" << opts.name << "'\n";
    return kUsage;
  }
  return emit(opts.out, opts.notes ? f->notes + "\n" : f->text, out, err) ? kOk : kRuntime;
}

}  // namespace loopdom::cli
