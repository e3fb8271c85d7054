#include "loopdom/graph.hpp"

#include <algorithm>
#include <cstddef>

namespace loopdom {

std::vector<std::vector<int>> strongly_connected_components(const Adjacency& graph) {
  const int n = static_cast<int>(graph.size());
  std::vector<int> index(n, -1);
  std::vector<int> lowlink(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> components;

  struct Frame {
    int node;
    std::size_t next;
  };
  std::vector<Frame> frames;
  int counter = 0;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    frames.push_back({root, 0});
    index[root] = lowlink[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;

    while (!frames.empty()) {
      Frame& f = frames.back();
      const int v = f.node;
      if (f.next < graph[v].size()) {
        const int w = graph[v][f.next++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
        continue;
      }
      if (lowlink[v] == index[v]) {
        auto it = std::find(stack.rbegin(), stack.rend(), v).base() - 1;
        std::vector<int> component(it, stack.end());
        for (int w : component) on_stack[w] = 0;
        stack.erase(it, stack.end());
        components.push_back(std::move(component));
      }
      frames.pop_back();
      if (!frames.empty()) {
        const int parent = frames.back().node;
        lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
      }
    }
  }
  return components;
}

}  // namespace loopdom
