#pragma once

#include <vector>

namespace loopdom {

using Adjacency = std::vector<std::vector<int>>;

/// Tarjan's algorithm with an explicit stack. Components are returned in
/// reverse topological order; nodes inside a component appear in discovery
/// order.
std::vector<std::vector<int>> strongly_connected_components(const Adjacency& graph);

}  // namespace loopdom
