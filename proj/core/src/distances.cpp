#include "hybrid/distances.hpp"

#include <algorithm>
#include <ostream>
#include <queue>

namespace hyb {

std::vector<std::uint32_t> bfs_hops(const Graph& g, NodeId s, std::uint32_t max_hops) {
  return bfs_hops_multi(g, {s}, nullptr, max_hops);
}

std::vector<std::uint32_t> bfs_hops_multi(const Graph& g, const std::vector<NodeId>& sources,
                                          std::vector<NodeId>* nearest, std::uint32_t max_hops) {
  std::vector<std::uint32_t> d(g.n(), kUnreached);
  std::vector<NodeId> near;
  if (nearest) near.assign(g.n(), kNoNode);
  std::vector<NodeId> srt(sources);
  std::sort(srt.begin(), srt.end());
  std::vector<NodeId> frontier;
  for (NodeId s : srt) {
    if (s >= g.n()) throw ConfigError("unknown node " + std::to_string(s));
    if (d[s] == 0) continue;
    d[s] = 0;
    if (nearest) near[s] = s;
    frontier.push_back(s);
  }
  std::vector<NodeId> next;
  for (std::uint32_t depth = 0; !frontier.empty() && depth < max_hops; ++depth) {
    next.clear();
    // Frontier is processed in ascending order of nearest source so ties go
    // to the smaller source.
    if (nearest)
      std::stable_sort(frontier.begin(), frontier.end(),
                       [&](NodeId a, NodeId b) { return near[a] < near[b]; });
    for (NodeId v : frontier)
      for (const auto& a : g.adj(v))
        if (d[a.to] == kUnreached) {
          d[a.to] = depth + 1;
          if (nearest) near[a.to] = near[v];
          next.push_back(a.to);
        }
    frontier.swap(next);
  }
  if (nearest) *nearest = std::move(near);
  return d;
}

std::vector<NodeId> ball(const Graph& g, NodeId v, std::uint32_t t) {
  if (v >= g.n()) throw ConfigError("unknown node " + std::to_string(v));
  auto d = bfs_hops(g, v, t);
  std::vector<NodeId> out;
  for (NodeId u = 0; u < g.n(); ++u)
    if (d[u] != kUnreached) out.push_back(u);
  return out;
}

std::vector<std::size_t> ball_profile(const Graph& g, NodeId v) {
  auto d = bfs_hops(g, v);
  std::uint32_t ecc = 0;
  for (auto x : d)
    if (x != kUnreached) ecc = std::max(ecc, x);
  std::vector<std::size_t> cnt(ecc + 1, 0);
  for (auto x : d)
    if (x != kUnreached) ++cnt[x];
  for (std::size_t i = 1; i < cnt.size(); ++i) cnt[i] += cnt[i - 1];
  return cnt;
}

std::uint32_t eccentricity(const Graph& g, NodeId v) {
  return static_cast<std::uint32_t>(ball_profile(g, v).size() - 1);
}

std::uint32_t hop_diameter(const Graph& g) {
  std::uint32_t d = 0;
  for (NodeId v = 0; v < g.n(); ++v) d = std::max(d, eccentricity(g, v));
  return d;
}

std::vector<Weight> dijkstra(const Graph& g, NodeId s) {
  if (s >= g.n()) throw ConfigError("unknown node " + std::to_string(s));
  std::vector<Weight> d(g.n(), kInf);
  using Item = std::pair<Weight, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[s] = 0;
  pq.push({0, s});
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (dv != d[v]) continue;
    for (const auto& a : g.adj(v))
      if (dv + a.w < d[a.to]) {
        d[a.to] = dv + a.w;
        pq.push({d[a.to], a.to});
      }
  }
  return d;
}

std::vector<Weight> hop_limited(const Graph& g, NodeId s, std::uint32_t h) {
  if (s >= g.n()) throw ConfigError("unknown node " + std::to_string(s));
  std::vector<Weight> d(g.n(), kInf), nd;
  d[s] = 0;
  std::vector<NodeId> active{s};
  std::vector<char> mark(g.n(), 0);
  for (std::uint32_t round = 0; round < h && !active.empty(); ++round) {
    nd = d;
    std::vector<NodeId> next;
    for (NodeId v : active)
      for (const auto& a : g.adj(v))
        if (d[v] + a.w < nd[a.to]) {
          nd[a.to] = d[v] + a.w;
          if (!mark[a.to]) {
            mark[a.to] = 1;
            next.push_back(a.to);
          }
        }
    for (NodeId v : next) mark[v] = 0;
    d.swap(nd);
    active.swap(next);
  }
  return d;
}

DistanceTable oracle_distances(const Graph& g, const std::vector<NodeId>& sources,
                               std::optional<std::uint32_t> hop_limit) {
  if (sources.empty()) throw ConfigError("oracle_distances needs at least one source");
  DistanceTable t;
  t.sources = sources;
  t.hop_limit = hop_limit;
  for (NodeId s : sources) {
    t.dist.push_back(dijkstra(g, s));
    t.hops.push_back(bfs_hops(g, s));
    if (hop_limit) t.dist_h.push_back(hop_limited(g, s, *hop_limit));
  }
  return t;
}

void DistanceTable::to_csv(std::ostream& os, const Graph& g) const {
  os << "source,node,dist,hops\n";
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (NodeId v = 0; v < g.n(); ++v)
      os << g.id(sources[i]) << ',' << g.id(v) << ',' << dist[i][v] << ',' << hops[i][v] << '\n';
}

std::vector<std::vector<Weight>> all_pairs(const Graph& g) {
  std::vector<std::vector<Weight>> out(g.n());
  for (NodeId v = 0; v < g.n(); ++v) out[v] = dijkstra(g, v);
  return out;
}

}  // namespace hyb
