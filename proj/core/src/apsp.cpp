#include <algorithm>
#include <cmath>

#include "hybrid/distances.hpp"
#include "hybrid/dissemination.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/shortest_paths.hpp"

namespace hyb {

namespace {

Weight add(Weight a, Weight b) { return a >= kInf || b >= kInf ? kInf : a + b; }

DistanceEstimate all_sources(std::size_t n) {
  DistanceEstimate e;
  for (NodeId v = 0; v < n; ++v) e.sources.push_back(v);
  e.est.assign(n, std::vector<Weight>(n, kInf));
  return e;
}

}  // namespace

DistanceEstimate apsp_unweighted(Network& net, double eps) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (g.weighted()) throw ConfigError("unweighted APSP needs an unweighted graph");
  if (!(eps > 0 && eps < 1)) throw ConfigError("eps must lie in (0, 1)");
  std::uint64_t start = net.rounds();
  NqReport nq = nq_distributed(net, n);

  std::vector<NodeId> all;
  std::vector<std::vector<std::uint64_t>> ids;
  for (NodeId v = 0; v < n; ++v) all.push_back(v), ids.push_back({g.id(v)});
  broadcast_values(net, all, ids);

  Clustering cl = cluster_partition(net, n, &nq);
  SkeletonGraph s = default_skeleton(net);
  std::vector<std::vector<Weight>> dl;  // per cluster: SSSP from its leader
  for (NodeId c : cl.leader) dl.push_back(sssp_staged(net, s, {c}).est[0]);

  double xd = std::ceil(4.0 * nq.value * log_n(n) / eps);
  std::uint32_t x = static_cast<std::uint32_t>(std::min<double>(xd, static_cast<double>(n)));
  net.local_rounds(x);

  // Nearest leader by the SSSP estimates, ties to the lower cluster index.
  std::vector<std::uint32_t> near(n, 0);
  std::vector<std::vector<std::uint64_t>> tag;
  for (NodeId w = 0; w < n; ++w) {
    for (std::uint32_t c = 1; c < dl.size(); ++c)
      if (dl[c][w] < dl[near[w]][w]) near[w] = c;
    tag.push_back({g.id(cl.leader[near[w]]), dl[near[w]][w]});
  }
  broadcast_values(net, all, tag);

  DistanceEstimate e = all_sources(n);
  for (NodeId v = 0; v < n; ++v) {
    auto hops = bfs_hops(g, v, x);
    for (NodeId w = 0; w < n; ++w)
      e.est[v][w] = hops[w] != kUnreached ? hops[w] : add(dl[near[w]][v], dl[near[w]][w]);
  }
  e.stretch = 1.0 + 3.0 * eps + eps * eps;
  e.rounds = net.rounds() - start;
  return e;
}

DistanceEstimate apsp_unweighted_eps(Network& net, double eps) { return apsp_unweighted(net, eps / 4.0); }

DistanceEstimate apsp_weighted_spanner(Network& net, double eps) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  std::uint64_t start = net.rounds();
  double lg = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
  std::uint32_t kappa = static_cast<std::uint32_t>(std::max(1.0, std::ceil(eps * lg / 2.0)));
  Spanner sp = build_spanner(g, kappa, net.seed());
  net.local_rounds(2 * kappa);

  std::vector<NodeId> holder;
  std::vector<std::vector<std::uint64_t>> items;
  for (auto ei : sp.edges) {
    const auto& ed = g.edge(ei);
    holder.push_back(std::min(ed.u, ed.v));
    items.push_back({g.id(std::max(ed.u, ed.v)), ed.w});
  }
  if (!items.empty()) broadcast_values(net, holder, items);

  DistanceEstimate e = all_sources(n);
  for (NodeId v = 0; v < n; ++v) e.est[v] = dijkstra(sp.graph, v);
  e.stretch = sp.stretch();
  e.degenerate = kappa == 1;
  e.rounds = net.rounds() - start;
  return e;
}

DistanceEstimate apsp_weighted_skeleton(Network& net, std::uint32_t alpha) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (alpha < 1) throw ConfigError("alpha must be >= 1");
  std::uint64_t start = net.rounds();
  NqReport nq = nq_distributed(net, n);
  double nn = static_cast<double>(n);
  double t = std::pow(nn, 1.0 / (3.0 * alpha + 1.0)) *
             std::pow(static_cast<double>(nq.value), 2.0 / (3.0 + 1.0 / alpha));
  SkeletonGraph s = build_skeleton(net, std::clamp(t, 1.0, nn));

  Spanner sp = build_spanner(s.graph, alpha, net.seed());
  net.local_rounds(2ull * alpha * s.h);
  std::vector<NodeId> holder;
  std::vector<std::vector<std::uint64_t>> items;
  for (auto ei : sp.edges) {
    const auto& ed = s.graph.edge(ei);
    holder.push_back(s.nodes[std::min(ed.u, ed.v)]);
    items.push_back({g.id(s.nodes[std::max(ed.u, ed.v)]), ed.w});
  }
  if (!items.empty()) broadcast_values(net, holder, items);
  std::vector<std::vector<Weight>> dhat;
  for (std::uint32_t u = 0; u < s.size(); ++u) dhat.push_back(dijkstra(sp.graph, u));

  std::vector<NodeId> all;
  for (NodeId v = 0; v < n; ++v) all.push_back(v);
  auto dh = hop_limited_rows(g, all, s.h);
  net.local_rounds(s.h);

  // Closest skeleton node by d^h, ties to the lower index.
  std::vector<std::uint32_t> vs(n, kNone32);
  holder.clear();
  items.clear();
  for (NodeId v = 0; v < n; ++v) {
    Weight best = kInf;
    for (std::uint32_t u = 0; u < s.size(); ++u)
      if (dh[v][s.nodes[u]] < best) best = dh[v][s.nodes[u]], vs[v] = u;
    if (vs[v] == kNone32) continue;
    holder.push_back(v);
    items.push_back({g.id(s.nodes[vs[v]]), best});
  }
  if (!items.empty()) broadcast_values(net, holder, items);

  DistanceEstimate e = all_sources(n);
  for (NodeId v = 0; v < n; ++v)
    for (NodeId w = 0; w < n; ++w) {
      Weight best = dh[v][w];
      if (vs[v] != kNone32 && vs[w] != kNone32)
        best = std::min(best, add(add(dh[v][s.nodes[vs[v]]], dhat[vs[v]][vs[w]]), dh[w][s.nodes[vs[w]]]));
      e.est[v][w] = best;
    }
  e.stretch = 4.0 * alpha - 1.0;
  e.rounds = net.rounds() - start;
  return e;
}

}  // namespace hyb
