#pragma once

#include <cstddef>
#include <vector>

namespace mominv {

using Adjacency = std::vector<std::vector<std::size_t>>;

struct Components {
  /// component[v] = id of the strongly connected component holding v.
  std::vector<std::size_t> component;
  /// Components in Tarjan completion order: every edge u -> v between distinct
  /// components has component[v] completed before component[u].
  std::vector<std::vector<std::size_t>> members;
};

/// Iterative Tarjan; safe for graphs with millions of nodes.
Components strongly_connected_components(const Adjacency& graph);

}  // namespace mominv
