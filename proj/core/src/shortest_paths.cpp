#include "hybrid/shortest_paths.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>

#include "hybrid/distances.hpp"
#include "hybrid/dissemination.hpp"
#include "hybrid/tree.hpp"

namespace hyb {

namespace {

Weight add(Weight a, Weight b) { return a >= kInf || b >= kInf ? kInf : a + b; }

std::vector<NodeId> sorted_unique(std::vector<NodeId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Synchronous Bellman-Ford iterations over the skeleton until nothing
// changes; returns the number of iterations that changed something.
std::uint32_t relax_skeleton(const Graph& sg, std::vector<Weight>& d) {
  std::uint32_t iters = 0;
  for (;;) {
    std::vector<Weight> nd = d;
    bool changed = false;
    for (const auto& e : sg.edges()) {
      if (add(d[e.u], e.w) < nd[e.v]) nd[e.v] = d[e.u] + e.w, changed = true;
      if (add(d[e.v], e.w) < nd[e.u]) nd[e.u] = d[e.v] + e.w, changed = true;
    }
    if (!changed) return iters;
    d.swap(nd);
    ++iters;
  }
}

}  // namespace

SsspMode parse_sssp_mode(const std::string& s) {
  if (s == "in_model" || s == "model") return SsspMode::InModel;
  if (s == "oracle") return SsspMode::Oracle;
  throw ConfigError("unknown sssp mode '" + s + "'");
}

SourceMode parse_source_mode(const std::string& s) {
  if (s == "random") return SourceMode::Random;
  if (s == "arbitrary") return SourceMode::Arbitrary;
  throw ConfigError("unknown source mode '" + s + "'");
}

void DistanceEstimate::to_csv(std::ostream& os, const Graph& g) const {
  os << "source,target,estimate,oracle,ratio\n";
  std::vector<NodeId> nodes = scope;
  if (nodes.empty())
    for (NodeId v = 0; v < g.n(); ++v) nodes.push_back(v);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto d = dijkstra(g, sources[i]);
    for (NodeId v : nodes) {
      os << g.id(sources[i]) << ',' << g.id(v) << ',';
      if (est[i][v] >= kInf) os << "inf";
      else os << est[i][v];
      os << ',';
      if (d[v] >= kInf) os << "inf";
      else os << d[v];
      os << ',';
      if (d[v] == 0) os << (est[i][v] == 0 ? "1" : "inf");
      else if (est[i][v] >= kInf || d[v] >= kInf) os << "inf";
      else os << static_cast<double>(est[i][v]) / static_cast<double>(d[v]);
      os << '\n';
    }
  }
}

StretchReport check_stretch(const Graph& g, const DistanceEstimate& e, double bound) {
  StretchReport r;
  std::vector<NodeId> nodes = e.scope;
  if (nodes.empty())
    for (NodeId v = 0; v < g.n(); ++v) nodes.push_back(v);
  for (std::size_t i = 0; i < e.sources.size(); ++i) {
    auto d = dijkstra(g, e.sources[i]);
    for (NodeId v : nodes) {
      if (d[v] >= kInf) continue;
      ++r.pairs;
      Weight x = e.est[i][v];
      if (x >= kInf) {
        ++r.unreached;
        continue;
      }
      if (x < d[v]) {
        ++r.underestimates;
        continue;
      }
      if (d[v] == 0) {
        if (x != 0) ++r.violations;
        continue;
      }
      double ratio = static_cast<double>(x) / static_cast<double>(d[v]);
      r.max_ratio = std::max(r.max_ratio, ratio);
      if (ratio > bound * (1.0 + 1e-12)) ++r.violations;
    }
  }
  return r;
}

SkeletonGraph default_skeleton(Network& net) {
  double x = std::max(1.0, std::sqrt(static_cast<double>(net.n())));
  return build_skeleton(net, x);
}

DistanceEstimate sssp_staged(Network& net, const SkeletonGraph& s, const std::vector<NodeId>& sources) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  std::uint64_t start = net.rounds();
  VirtualTree tree = build_virtual_tree(net);
  DistanceEstimate e;
  e.sources = sources;
  auto rows = hop_limited_rows(g, sources, s.h);
  net.local_rounds(s.h);

  const std::size_t ns = s.size();
  std::vector<std::vector<Weight>> D(sources.size(), std::vector<Weight>(ns));
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (std::uint32_t u = 0; u < ns; ++u) D[i][u] = rows[i][s.nodes[u]];
  for (;;) {
    std::vector<std::uint64_t> flag(n, 0);
    for (std::size_t i = 0; i < sources.size(); ++i) {
      std::vector<Weight> nd = D[i];
      for (const auto& ed : s.graph.edges()) {
        if (add(D[i][ed.u], ed.w) < nd[ed.v]) nd[ed.v] = D[i][ed.u] + ed.w, flag[s.nodes[ed.v]] = 1;
        if (add(D[i][ed.v], ed.w) < nd[ed.u]) nd[ed.u] = D[i][ed.v] + ed.w, flag[s.nodes[ed.u]] = 1;
      }
      D[i].swap(nd);
    }
    net.local_rounds(s.h);
    auto any = tree_aggregate_broadcast(net, tree, flag, AggOp::Max);
    if (any.empty() || any[0] == 0) break;
  }
  net.local_rounds(s.h);
  e.est.assign(sources.size(), std::vector<Weight>(n, kInf));
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (NodeId v = 0; v < n; ++v) {
      Weight best = rows[i][v];
      for (std::uint32_t u = 0; u < ns; ++u) best = std::min(best, add(D[i][u], s.dh[u][v]));
      e.est[i][v] = best;
    }
  e.rounds = net.rounds() - start;
  return e;
}

DistanceEstimate sssp(Network& net, NodeId source, double eps, SsspMode mode) {
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  if (source >= net.n()) throw ConfigError("source out of range");
  DistanceEstimate e;
  if (mode == SsspMode::Oracle) {
    e.sources = {source};
    e.est.push_back(dijkstra(net.graph(), source));
  } else {
    std::uint64_t start = net.rounds();
    SkeletonGraph s = default_skeleton(net);
    e = sssp_staged(net, s, {source});
    e.rounds = net.rounds() - start;
  }
  e.stretch = 1.0 + eps;
  return e;
}

DistanceEstimate skeleton_kssp(Network& net, const SkeletonGraph& s, const std::vector<NodeId>& sources) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  const std::size_t ns = s.size();
  std::uint64_t start = net.rounds();
  std::uint32_t depth = 0;
  std::vector<std::vector<Weight>> init;
  for (NodeId src : sources) {
    if (!s.contains(src)) throw ConfigError("k-SSP source outside the skeleton");
    std::vector<Weight> d(ns, kInf);
    d[s.index[src]] = 0;
    init.push_back(d);
    depth = std::max(depth, relax_skeleton(s.graph, d));
  }
  // Everyone agrees on the common round bound first.
  VirtualTree tree = build_virtual_tree(net);
  tree_aggregate_broadcast(net, tree, std::vector<std::uint64_t>(n, depth + 1), AggOp::Max);

  std::vector<std::unique_ptr<BellmanFordProgram>> progs;
  std::vector<NodeProgram*> ptrs;
  for (auto& d : init) {
    progs.push_back(std::make_unique<BellmanFordProgram>(d, depth + 1));
    ptrs.push_back(progs.back().get());
  }
  auto sched = schedule_on_skeleton(net, s, ptrs, net.cap(), depth + 1, net.seed());

  net.local_rounds(s.h);
  DistanceEstimate e;
  e.sources = sources;
  e.est.assign(sources.size(), std::vector<Weight>(n, kInf));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto ds = parse_distances(sched.outputs[i]);
    for (NodeId v = 0; v < n; ++v) {
      Weight best = kInf;
      for (std::uint32_t u = 0; u < ns; ++u) best = std::min(best, add(ds[u], s.dh[u][v]));
      e.est[i][v] = best;
    }
  }
  e.rounds = net.rounds() - start;
  return e;
}

DistanceEstimate k_ssp(Network& net, const std::vector<NodeId>& S_in, double eps, SourceMode mode) {
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  auto S = sorted_unique(S_in);
  if (S.empty()) throw ConfigError("k-SSP needs at least one source");
  for (NodeId s : S)
    if (s >= n) throw ConfigError("source out of range");
  std::uint64_t start = net.rounds();
  double x = std::clamp(std::sqrt(static_cast<double>(S.size())), 1.0, static_cast<double>(n));
  DistanceEstimate e;

  if (mode == SourceMode::Random) {
    std::vector<NodeId> nodes = S;
    for (NodeId v = 0; v < n; ++v)
      if (net.rng(v).bernoulli(1.0 / x)) nodes.push_back(v);
    SkeletonGraph s = skeleton_over(net, nodes, x);
    e = skeleton_kssp(net, s, S);
    e.stretch = 1.0 + eps;
  } else {
    SkeletonGraph s = build_skeleton(net, x);
    // Every node learns its h-hop neighborhood with distances.
    net.local_rounds(s.h);
    auto rows = hop_limited_rows(g, S, s.h);
    std::vector<NodeId> proxy(S.size(), kNoNode);
    std::vector<Weight> pd(S.size(), kInf);
    std::vector<NodeId> holder;
    std::vector<std::vector<std::uint64_t>> items;
    for (std::size_t i = 0; i < S.size(); ++i) {
      for (std::uint32_t u = 0; u < s.size(); ++u)
        if (rows[i][s.nodes[u]] < pd[i]) pd[i] = rows[i][s.nodes[u]], proxy[i] = s.nodes[u];
      if (proxy[i] == kNoNode) continue;
      holder.push_back(S[i]);
      items.push_back({g.id(proxy[i]), pd[i]});
    }
    if (!items.empty()) broadcast_values(net, holder, items);
    std::vector<NodeId> U;
    for (NodeId p : proxy)
      if (p != kNoNode) U.push_back(p);
    U = sorted_unique(U);
    DistanceEstimate eu;
    if (!U.empty()) eu = skeleton_kssp(net, s, U);
    e.sources = S;
    e.est.assign(S.size(), std::vector<Weight>(n, kInf));
    for (std::size_t i = 0; i < S.size(); ++i) {
      std::size_t ui = proxy[i] == kNoNode ? 0 : std::lower_bound(U.begin(), U.end(), proxy[i]) - U.begin();
      for (NodeId v = 0; v < n; ++v) {
        Weight best = rows[i][v];
        if (proxy[i] != kNoNode) best = std::min(best, add(eu.est[ui][v], pd[i]));
        e.est[i][v] = best;
      }
    }
    e.stretch = 3.0 + eps;
  }
  e.rounds = net.rounds() - start;
  return e;
}

KlSpResult kl_sp(Network& net, const std::vector<NodeId>& S_in, const std::vector<NodeId>& T_in, double eps,
                 int kase, std::uint64_t seed) {
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  if (kase != 1 && kase != 2) throw ConfigError("kl-SP case must be 1 or 2");
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  auto S = sorted_unique(S_in);
  auto T = sorted_unique(T_in);
  if (S.empty() || T.empty()) throw ConfigError("kl-SP needs sources and targets");
  for (NodeId v : S)
    if (v >= n) throw ConfigError("source out of range");
  for (NodeId v : T)
    if (v >= n) throw ConfigError("target out of range");
  std::uint64_t start = net.rounds();
  KlSpResult r;
  const std::uint64_t k = S.size(), l = T.size();
  r.nq_k = nq_distributed(net, k).value;
  const std::uint64_t q = r.nq_k;
  if (kase == 1 && l > q) r.constraints_ok = false, r.reason = "l exceeds NQ_k";
  if (kase == 2 && l > q * q) r.constraints_ok = false, r.reason = "l exceeds NQ_k^2";
  if (kase == 2 && k * l > q * n) r.constraints_ok = false, r.reason = "k*l exceeds NQ_k*n";

  // val[j][v]: estimate of d(T[j], v), known at v.
  std::vector<std::vector<Weight>> val;
  if (kase == 1) {
    SkeletonGraph s = default_skeleton(net);
    for (NodeId t : T) val.push_back(sssp_staged(net, s, {t}).est[0]);
  } else {
    val = k_ssp(net, T, eps, SourceMode::Random).est;
  }

  Weight top = 0;
  for (const auto& row : val)
    for (NodeId s : S)
      if (row[s] < kInf) top = std::max(top, row[s]);
  const std::uint32_t width = bitwidth(top) + 1;
  const std::uint64_t sentinel = width >= 64 ? ~0ull : (1ull << width) - 1;
  auto encode = [&](Weight w) { return w >= kInf ? sentinel : w; };

  Scenario sc = kase == 1 ? Scenario::ArbSrcRandTgt : Scenario::RandSrcRandTgt;
  auto probe = RoutingInstance::complete(net, sc, S, T, seed);
  const std::uint32_t pb = probe.payload_bits;
  r.chunks = ceil_div(width, pb);
  std::map<std::pair<NodeId, Ident>, std::pair<std::uint64_t, std::size_t>> got;  // (target, source id)
  for (std::size_t c = 0; c < r.chunks; ++c) {
    auto inst = RoutingInstance::complete(net, sc, S, T, seed + c);
    for (auto& d : inst.demands) {
      std::size_t j = std::lower_bound(T.begin(), T.end(), d.t) - T.begin();
      std::uint64_t x = encode(val[j][d.s]);
      std::uint32_t off = static_cast<std::uint32_t>(c * pb);
      d.payload = off >= 64 ? 0 : (x >> off) & ((pb >= 64 ? ~0ull : (1ull << pb) - 1));
    }
    r.last_route = kl_route(net, inst);
    for (NodeId t : T)
      for (const auto& [sid, p] : r.last_route.received[t]) {
        auto& slot = got[{t, sid}];
        std::uint32_t off = static_cast<std::uint32_t>(c * pb);
        if (off < 64) slot.first |= p << off;
        ++slot.second;
      }
  }

  r.estimate.sources = T;
  r.estimate.scope = S;
  r.estimate.stretch = 1.0 + eps;
  r.estimate.est.assign(l, std::vector<Weight>(n, kInf));
  for (std::size_t j = 0; j < l; ++j)
    for (NodeId s : S) {
      auto it = got.find({T[j], g.id(s)});
      if (it == got.end() || it->second.second != r.chunks) {
        ++r.mislabeled;
        continue;
      }
      std::uint64_t x = it->second.first;
      Weight w = x == sentinel ? kInf : x;
      if (w != val[j][s]) ++r.mislabeled;
      r.estimate.est[j][s] = w;
    }
  std::size_t expected = k * l;
  if (got.size() > expected) r.mislabeled += got.size() - expected;
  r.estimate.rounds = net.rounds() - start;
  return r;
}

}  // namespace hyb
