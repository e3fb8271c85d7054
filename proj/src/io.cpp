#include "loopdom/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace loopdom {

using nlohmann::json;

json catalog_to_json(const LoopCatalog& catalog) {
  json loops = json::array();
  for (const auto& rec : catalog.records()) {
    json entry;
    entry["cycle"] = rec.cycle;
    entry["discovery_score"] = rec.discovery_score;
    if (rec.found_at)
      entry["found_at"] = *rec.found_at;
    else
      entry["found_at"] = "static";
    loops.push_back(std::move(entry));
  }
  return json{{"provenance", std::string(to_string(catalog.provenance()))},
              {"overflow", catalog.overflow()},
              {"loops", std::move(loops)}};
}

LoopCatalog catalog_from_json(const json& doc) {
  try {
    LoopCatalog catalog;
    const auto prov = doc.at("provenance").get<std::string>();
    if (prov == "exhaustive")
      catalog.set_provenance(Provenance::Exhaustive);
    else if (prov == "strongest-path")
      catalog.set_provenance(Provenance::StrongestPath);
    else
      throw std::invalid_argument("unknown provenance '" + prov + "'");
    catalog.set_overflow(doc.value("overflow", false));
    for (const auto& entry : doc.at("loops")) {
      LoopRecord rec;
      rec.cycle = entry.at("cycle").get<std::vector<std::string>>();
      rec.discovery_score = entry.value("discovery_score", 0.0);
      if (entry.contains("found_at") && entry["found_at"].is_number_unsigned())
        rec.found_at = entry["found_at"].get<std::size_t>();
      catalog.insert(std::move(rec));
    }
    return catalog;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed catalog: ") + e.what());
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c == ',' || c == ' ' || c == '\t') return false;
  return true;
}

}  // namespace

EdgeListResult parse_edge_list(std::string_view text) {
  EdgeListResult result;
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;
  std::vector<Edge> edges;
  std::vector<double> weights;
  std::unordered_map<std::uint64_t, int> seen;  // edge key -> line

  auto node = [&](std::string_view name) {
    auto [it, fresh] = ids.try_emplace(std::string(name), static_cast<int>(names.size()));
    if (fresh) names.emplace_back(name);
    return it->second;
  };
  auto error = [&](int line, int column, std::string msg) {
    result.diagnostics.push_back({Severity::Error, {line, column}, std::move(msg)});
  };

  bool header = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view raw = text.substr(pos, end - pos);
    const std::string_view line = trim(raw);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> cells;
    std::vector<int> columns;
    std::size_t start = 0;
    const auto offset = static_cast<std::size_t>(line.data() - raw.data());
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t stop = comma == std::string_view::npos ? line.size() : comma;
      cells.push_back(trim(line.substr(start, stop - start)));
      columns.push_back(static_cast<int>(offset + start + 1));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    if (!header) {
      header = true;
      if (cells.size() == 3 && cells[0] == "src" && cells[1] == "dst" && cells[2] == "weight")
        continue;
      error(line_no, 1, "expected header 'src,dst,weight'");
      continue;
    }
    if (cells.size() != 3) {
      error(line_no, 1, "expected 3 fields, found " + std::to_string(cells.size()));
      continue;
    }
    bool bad = false;
    for (int i = 0; i < 2; ++i) {
      if (!valid_name(cells[i])) {
        error(line_no, columns[i], "invalid node name '" + std::string(cells[i]) + "'");
        bad = true;
      }
    }
    double w = 0.0;
    const auto& wc = cells[2];
    auto [ptr, ec] = std::from_chars(wc.data(), wc.data() + wc.size(), w);
    if (wc.empty() || ec != std::errc() || ptr != wc.data() + wc.size() || !std::isfinite(w)) {
      error(line_no, columns[2], "invalid weight '" + std::string(wc) + "'");
      bad = true;
    }
    if (bad) continue;

    const int src = node(cells[0]);
    const int dst = node(cells[1]);
    const std::uint64_t key = (static_cast<std::uint64_t>(src) << 32) | static_cast<std::uint32_t>(dst);
    if (auto it = seen.find(key); it != seen.end()) {
      error(line_no, 1, "duplicate edge " + names[src] + " -> " + names[dst] +
                            " (first on line " + std::to_string(it->second) + ")");
      continue;
    }
    seen.emplace(key, line_no);
    edges.push_back({src, dst, EdgeKind::Dependency});
    weights.push_back(w);
  }

  if (result.ok()) {
    std::vector<bool> stock(names.size(), true);
    result.edges.graph = Digraph(std::move(names), std::move(stock), std::move(edges));
    result.edges.weights = std::move(weights);
  }
  return result;
}

}  // namespace loopdom
