#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "hybrid/graph.hpp"

namespace hyb {

inline constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

// Hop distances from s; kUnreached beyond max_hops.
std::vector<std::uint32_t> bfs_hops(const Graph& g, NodeId s, std::uint32_t max_hops = kUnreached);
// Multi-source BFS; also reports the nearest source (ties to the smaller source index).
std::vector<std::uint32_t> bfs_hops_multi(const Graph& g, const std::vector<NodeId>& sources,
                                          std::vector<NodeId>* nearest = nullptr,
                                          std::uint32_t max_hops = kUnreached);
// Nodes within t hops of v, sorted by index.
std::vector<NodeId> ball(const Graph& g, NodeId v, std::uint32_t t);
// Ball sizes |B_0(v)|, |B_1(v)|, ... until the ball stops growing.
std::vector<std::size_t> ball_profile(const Graph& g, NodeId v);

std::uint32_t eccentricity(const Graph& g, NodeId v);
std::uint32_t hop_diameter(const Graph& g);

std::vector<Weight> dijkstra(const Graph& g, NodeId s);
// Exact d^h(s, .) by h rounds of Bellman-Ford.
std::vector<Weight> hop_limited(const Graph& g, NodeId s, std::uint32_t h);

struct DistanceTable {
  std::vector<NodeId> sources;
  std::vector<std::vector<Weight>> dist;           // [source][node]
  std::vector<std::vector<std::uint32_t>> hops;    // [source][node]
  std::optional<std::uint32_t> hop_limit;
  std::vector<std::vector<Weight>> dist_h;         // filled when hop_limit is set

  void to_csv(std::ostream& os, const Graph& g) const;
};

DistanceTable oracle_distances(const Graph& g, const std::vector<NodeId>& sources,
                               std::optional<std::uint32_t> hop_limit = std::nullopt);

// All-pairs weighted distances (n Dijkstras).
std::vector<std::vector<Weight>> all_pairs(const Graph& g);

}  // namespace hyb
