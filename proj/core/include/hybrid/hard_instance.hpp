#pragma once

#include <string>
#include <vector>

#include "hybrid/graph.hpp"

namespace hyb {

// Reweighting of a base graph that separates V \ B_r(v) into a near part V1
// and a far part V2 with d(v, V2) >= gap * d(v, V1).
struct HardInstance {
  Graph graph;
  NodeId v = kNoNode;
  std::uint32_t r = 0;
  std::vector<NodeId> v1, v2;
  Weight gap = 1;      // n^p_exponent
  Weight heavy = 1;    // n * gap, weight of non-tree and crossing edges
  bool degenerate = false;
  std::string reason;
};

// v is a node attaining NQ_k(G), r = NQ_k - 1. Requires k <= n/2, n >= 8 and
// NQ_k >= 3; otherwise the result is flagged degenerate and carries the base graph.
HardInstance hard_instance(const Graph& g, std::uint64_t k, std::uint32_t p_exponent = 1);

}  // namespace hyb
