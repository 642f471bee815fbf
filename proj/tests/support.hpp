#pragma once

// Reference computations written independently of the library.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "hybrid/graph.hpp"

namespace ref {

inline std::vector<std::uint32_t> bfs(const hyb::Graph& g, hyb::NodeId s) {
  std::vector<std::uint32_t> d(g.n(), std::numeric_limits<std::uint32_t>::max());
  std::deque<hyb::NodeId> q{s};
  d[s] = 0;
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    for (const auto& a : g.adj(u))
      if (d[a.to] == std::numeric_limits<std::uint32_t>::max()) d[a.to] = d[u] + 1, q.push_back(a.to);
  }
  return d;
}

inline std::uint32_t diameter(const hyb::Graph& g) {
  std::uint32_t D = 0;
  for (hyb::NodeId v = 0; v < g.n(); ++v)
    for (auto x : ref::bfs(g, v)) D = std::max(D, x);
  return D;
}

// Smallest t >= 1 with t * |B_t(v)| >= k, capped at D (at least 1).
inline std::uint32_t nq_node(const hyb::Graph& g, std::uint64_t k, hyb::NodeId v, std::uint32_t D) {
  auto d = ref::bfs(g, v);
  for (std::uint32_t t = 1; t < std::max<std::uint32_t>(D, 1); ++t) {
    std::uint64_t ball = std::count_if(d.begin(), d.end(), [&](std::uint32_t x) { return x <= t; });
    if (t * ball >= k) return t;
  }
  return std::max<std::uint32_t>(D, 1);
}

inline std::uint32_t nq(const hyb::Graph& g, std::uint64_t k) {
  std::uint32_t D = ref::diameter(g), best = 0;
  for (hyb::NodeId v = 0; v < g.n(); ++v) best = std::max(best, ref::nq_node(g, k, v, D));
  return best;
}

inline std::vector<std::vector<std::uint64_t>> floyd(const hyb::Graph& g) {
  const std::uint64_t inf = std::numeric_limits<std::uint64_t>::max() / 4;
  std::vector<std::vector<std::uint64_t>> d(g.n(), std::vector<std::uint64_t>(g.n(), inf));
  for (hyb::NodeId v = 0; v < g.n(); ++v) d[v][v] = 0;
  for (const auto& e : g.edges()) d[e.u][e.v] = d[e.v][e.u] = std::min(d[e.u][e.v], e.w);
  for (std::size_t k = 0; k < g.n(); ++k)
    for (std::size_t i = 0; i < g.n(); ++i)
      for (std::size_t j = 0; j < g.n(); ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

}  // namespace ref
