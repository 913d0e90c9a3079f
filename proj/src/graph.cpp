#include "mominv/graph.hpp"

#include <limits>

namespace mominv {

Components strongly_connected_components(const Adjacency& graph) {
  constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
  const std::size_t n = graph.size();
  Components out;
  out.component.assign(n, unvisited);

  std::vector<std::size_t> index(n, unvisited);
  std::vector<std::size_t> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  // (node, next edge position) frames replace recursion.
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  std::size_t counter = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < graph[v].size()) {
        std::size_t w = graph[v][pos++];
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) {
        std::size_t parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<std::size_t> members;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          out.component[w] = out.members.size();
          members.push_back(w);
        } while (w != done);
        out.members.push_back(std::move(members));
      }
    }
  }
  return out;
}

}  // namespace mominv
