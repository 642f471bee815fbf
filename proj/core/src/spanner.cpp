#include "hybrid/spanner.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hybrid/distances.hpp"
#include "hybrid/rng.hpp"

namespace hyb {

namespace {
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
}  // namespace

double Spanner::size_bound(std::size_t n, std::uint32_t kappa) {
  double nn = static_cast<double>(n);
  return kSpannerSizeC * kappa * std::pow(nn, 1.0 + 1.0 / kappa) * log_n(n);
}

Spanner build_spanner(const Graph& g, std::uint32_t kappa, std::uint64_t seed) {
  if (kappa < 1) throw ConfigError("spanner stretch parameter must be >= 1");
  const std::size_t n = g.n();
  Spanner s;
  s.kappa = kappa;
  std::vector<char> alive(g.m(), 1), keep(g.m(), 0);
  std::vector<NodeId> cl(n);
  for (NodeId v = 0; v < n; ++v) cl[v] = v;
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    const auto& ea = g.edge(a);
    const auto& eb = g.edge(b);
    return ea.w != eb.w ? ea.w < eb.w : a < b;
  };
  // Lightest alive edge from v to every adjacent cluster.
  auto lightest = [&](NodeId v) {
    std::map<NodeId, std::uint32_t> best;
    for (const auto& a : g.adj(v)) {
      if (!alive[a.edge] || cl[a.to] == kNoNode) continue;
      auto it = best.find(cl[a.to]);
      if (it == best.end()) best.emplace(cl[a.to], a.edge);
      else if (less(a.edge, it->second)) it->second = a.edge;
    }
    return best;
  };
  auto drop_to = [&](NodeId v, NodeId c) {
    for (const auto& a : g.adj(v))
      if (cl[a.to] == c) alive[a.edge] = 0;
  };

  double p = std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), -1.0 / kappa);
  Rng rng(seed, 0x5a7);
  for (std::uint32_t level = 1; level < kappa; ++level) {
    std::vector<char> sampled(n, 0);
    for (NodeId c = 0; c < n; ++c)
      if (rng.bernoulli(p)) sampled[c] = 1;
    std::vector<NodeId> next(n, kNoNode);
    std::vector<std::vector<NodeId>> drops(n);
    for (NodeId v = 0; v < n; ++v) {
      if (cl[v] == kNoNode) continue;
      if (sampled[cl[v]]) {
        next[v] = cl[v];
        continue;
      }
      auto best = lightest(v);
      std::uint32_t emin = kNone;
      NodeId cmin = kNoNode;
      for (auto [c, e] : best)
        if (sampled[c] && (emin == kNone || less(e, emin))) {
          emin = e;
          cmin = c;
        }
      if (emin == kNone) {
        for (auto [c, e] : best) {
          keep[e] = 1;
          drops[v].push_back(c);
        }
      } else {
        keep[emin] = 1;
        next[v] = cmin;
        drops[v].push_back(cmin);
        for (auto [c, e] : best)
          if (c != cmin && less(e, emin)) {
            keep[e] = 1;
            drops[v].push_back(c);
          }
      }
    }
    for (NodeId v = 0; v < n; ++v)
      for (NodeId c : drops[v]) drop_to(v, c);
    cl = std::move(next);
    for (std::uint32_t e = 0; e < g.m(); ++e) {
      const auto& ed = g.edge(e);
      if (cl[ed.u] == kNoNode || cl[ed.v] == kNoNode || cl[ed.u] == cl[ed.v]) alive[e] = 0;
    }
  }
  for (NodeId v = 0; v < n; ++v)
    for (auto [c, e] : lightest(v)) keep[e] = 1;

  s.graph = Graph(n);
  s.graph.set_ids(g.ids());
  for (std::uint32_t e = 0; e < g.m(); ++e)
    if (keep[e]) {
      s.edges.push_back(e);
      const auto& ed = g.edge(e);
      s.graph.add_edge(ed.u, ed.v, ed.w);
    }
  return s;
}

SpannerCheck verify_spanner(const Graph& g, const Spanner& s) {
  SpannerCheck c;
  for (auto e : s.edges) {
    if (e >= g.m()) {
      c.subgraph = false;
      continue;
    }
    const auto& a = g.edge(e);
    if (!s.graph.has_edge(a.u, a.v)) c.subgraph = false;
  }
  if (s.graph.m() != s.edges.size()) c.subgraph = false;
  c.size_ok = static_cast<double>(s.size()) <= Spanner::size_bound(g.n(), s.kappa);
  for (NodeId u = 0; u < g.n(); ++u) {
    auto dg = dijkstra(g, u);
    auto dh = dijkstra(s.graph, u);
    for (NodeId v = 0; v < g.n(); ++v) {
      if (u == v || dg[v] >= kInf) continue;
      double r = static_cast<double>(dh[v]) / static_cast<double>(dg[v]);
      c.max_ratio = std::max(c.max_ratio, r);
      if (dh[v] > static_cast<Weight>(s.stretch()) * dg[v]) ++c.violations;
    }
  }
  return c;
}

}  // namespace hyb
