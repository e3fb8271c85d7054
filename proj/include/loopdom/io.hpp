#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "loopdom/link_scores.hpp"
#include "loopdom/loops.hpp"
#include "loopdom/model.hpp"

namespace loopdom {

/// {"provenance", "overflow", "loops": [{"cycle", "discovery_score", "found_at"}]};
/// found_at is a step index or the string "static".
nlohmann::json catalog_to_json(const LoopCatalog& catalog);

/// Inverse of catalog_to_json. Throws std::invalid_argument on a malformed
/// document.
LoopCatalog catalog_from_json(const nlohmann::json& doc);

/// A static weighted graph read from `src,dst,weight` rows. Nodes are
/// numbered in order of first appearance and all are flagged as stocks.
struct EdgeList {
  Digraph graph;
  std::vector<double> weights;  // parallel to graph.edges()
};

struct EdgeListResult {
  EdgeList edges;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !has_errors(diagnostics); }
};

/// Expects a `src,dst,weight` header unless the text is blank. Malformed
/// rows and repeated edges produce located diagnostics.
EdgeListResult parse_edge_list(std::string_view text);

}  // namespace loopdom
