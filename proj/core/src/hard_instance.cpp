#include "hybrid/hard_instance.hpp"

#include <algorithm>

#include "hybrid/distances.hpp"
#include "hybrid/nq.hpp"

namespace hyb {

HardInstance hard_instance(const Graph& g, std::uint64_t k, std::uint32_t p_exponent) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const std::size_t n = g.n();
  HardInstance h;
  h.graph = g;
  auto fail = [&](std::string why) {
    h.degenerate = true;
    h.reason = std::move(why);
    return h;
  };
  if (n < 8) return fail("n < 8");
  if (2 * k > n) return fail("k > n/2");
  Weight gap = 1;
  for (std::uint32_t i = 0; i < p_exponent; ++i) {
    if (gap > kInf / n / n) throw ConfigError("gap factor overflows weights");
    gap *= n;
  }
  auto nq = nq_oracle(g, k);
  if (nq.value < 3) return fail("NQ_k < 3");

  h.v = nq.argmax;
  h.r = nq.value - 1;
  h.gap = gap;
  h.heavy = static_cast<Weight>(n) * gap;

  // BFS from v, recording tree parents and visiting order.
  std::vector<std::uint32_t> dist(n, kUnreached);
  std::vector<NodeId> parent(n, kNoNode), order;
  std::vector<std::uint32_t> tree_edge(n, 0);
  order.reserve(n);
  dist[h.v] = 0;
  order.push_back(h.v);
  for (std::size_t i = 0; i < order.size(); ++i) {
    NodeId u = order[i];
    for (const Arc& a : g.adj(u)) {
      if (dist[a.to] != kUnreached) continue;
      dist[a.to] = dist[u] + 1;
      parent[a.to] = u;
      tree_edge[a.to] = a.edge;
      order.push_back(a.to);
    }
  }
  if (order.size() != n) throw ConfigError("graph must be connected");

  const std::size_t quarter = ceil_div(n, 4);
  std::vector<int> side(n, 0);  // 0: ball, 1: V1, 2: V2
  for (NodeId u : order) {
    if (dist[u] <= h.r) continue;
    if (h.v1.size() < quarter) {
      side[u] = 1;
      h.v1.push_back(u);
    } else {
      side[u] = 2;
      h.v2.push_back(u);
    }
  }

  std::vector<char> is_tree(g.m(), 0);
  for (NodeId u = 0; u < n; ++u)
    if (parent[u] != kNoNode) is_tree[tree_edge[u]] = 1;
  for (std::uint32_t e = 0; e < g.m(); ++e) {
    const Edge& ed = g.edge(e);
    bool crossing = (side[ed.u] == 2) != (side[ed.v] == 2);
    h.graph.set_weight(e, is_tree[e] && !crossing ? 1 : h.heavy);
  }
  h.graph.meta["hard_instance"] = "v=" + std::to_string(g.id(h.v)) + ",r=" + std::to_string(h.r);
  return h;
}

}  // namespace hyb
