#pragma once

#include <vector>

#include "hybrid/graph.hpp"

namespace hyb {

inline constexpr double kSpannerSizeC = 1.0;

struct Spanner {
  std::uint32_t kappa = 1;
  std::vector<std::uint32_t> edges;  // indices into the input graph, sorted
  Graph graph;                       // same nodes and ids, spanner edges only
  std::uint32_t stretch() const { return 2 * kappa - 1; }
  std::size_t size() const { return edges.size(); }
  // c * kappa * n^(1+1/kappa) * log2 n
  static double size_bound(std::size_t n, std::uint32_t kappa);
};

// Clustered randomized construction: kappa-1 levels of cluster sampling at
// rate n^(-1/kappa), then every node keeps its lightest edge to each adjacent
// remaining cluster. Ties between equal weights break by edge index.
Spanner build_spanner(const Graph& g, std::uint32_t kappa, std::uint64_t seed);

struct SpannerCheck {
  double max_ratio = 1.0;
  std::size_t violations = 0;  // pairs with d_H > (2 kappa - 1) d_G
  bool subgraph = true;
  bool size_ok = true;
};
SpannerCheck verify_spanner(const Graph& g, const Spanner& s);

}  // namespace hyb
