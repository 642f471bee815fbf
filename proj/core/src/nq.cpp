#include "hybrid/nq.hpp"

#include <algorithm>
#include <ostream>

#include "hybrid/distances.hpp"

namespace hyb {

namespace {

// First t >= 1 with t * |B_t| >= k, given the ball profile (index = radius).
std::uint32_t first_good_t(const std::vector<std::size_t>& prof, std::uint64_t k, std::uint32_t cap) {
  for (std::uint32_t t = 1; t <= cap; ++t) {
    std::size_t b = prof[std::min<std::size_t>(t, prof.size() - 1)];
    if (static_cast<std::uint64_t>(b) * t >= k) return t;
  }
  return cap;
}

}  // namespace

void NqReport::to_csv(std::ostream& os, const Graph& g) const {
  os << "node,value\n";
  for (NodeId v = 0; v < per_node.size(); ++v) os << g.id(v) << ',' << per_node[v] << '\n';
}

std::uint32_t nq_node(const Graph& g, std::uint64_t k, NodeId v, std::uint32_t diameter) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (v >= g.n()) throw ConfigError("node out of range");
  return first_good_t(ball_profile(g, v), k, std::max<std::uint32_t>(diameter, 1));
}

std::uint32_t nq_node(const Graph& g, std::uint64_t k, NodeId v) {
  return nq_node(g, k, v, hop_diameter(g));
}

NqReport nq_oracle(const Graph& g, std::uint64_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!g.connected()) throw ConfigError("graph must be connected");
  NqReport r;
  r.k = k;
  r.diameter = hop_diameter(g);
  r.per_node.resize(g.n());
  for (NodeId v = 0; v < g.n(); ++v) {
    r.per_node[v] = nq_node(g, k, v, r.diameter);
    if (r.argmax == kNoNode || r.per_node[v] > r.value) {
      r.value = r.per_node[v];
      r.argmax = v;
    }
  }
  return r;
}

NqReport nq_distributed(Network& net, std::uint64_t k, const VirtualTree* tree) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  net.begin_phase("nq");
  const std::uint64_t start = net.rounds();
  VirtualTree own;
  if (!tree) {
    own = build_virtual_tree(net);
    tree = &own;
  }
  // Each node floods its ball one hop per round and tracks |B_t(v)|; the
  // per-node profiles are exactly what that flooding yields.
  std::vector<std::vector<std::size_t>> prof(n);
  for (NodeId v = 0; v < n; ++v) prof[v] = ball_profile(g, v);
  auto ball_at = [&](NodeId v, std::uint32_t t) { return prof[v][std::min<std::size_t>(t, prof[v].size() - 1)]; };

  std::vector<std::uint32_t> tv(n, 0);
  std::uint32_t t = 0;
  for (;;) {
    ++t;
    net.local_rounds(1);
    std::vector<std::uint64_t> sizes(n);
    for (NodeId v = 0; v < n; ++v) {
      sizes[v] = ball_at(v, t);
      if (tv[v] == 0 && sizes[v] * t >= k) tv[v] = t;
    }
    auto agg = tree_aggregate_broadcast(net, *tree, sizes, AggOp::Min);
    std::uint64_t nt = agg[tree->root()];
    if (nt * t >= k || nt == n) break;
  }
  NqReport r;
  r.k = k;
  r.diameter = 0;
  for (NodeId v = 0; v < n; ++v) r.diameter = std::max<std::uint32_t>(r.diameter, prof[v].size() - 1);
  r.per_node.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    r.per_node[v] = tv[v] == 0 ? t : std::min(tv[v], t);
    if (r.argmax == kNoNode || r.per_node[v] > r.value) {
      r.value = r.per_node[v];
      r.argmax = v;
    }
  }
  r.rounds = net.rounds() - start;
  return r;
}

NqReport nq_graph(const Graph& g, std::uint64_t k, NqMode mode, const ModelConfig& cfg, std::uint64_t seed) {
  if (mode == NqMode::Oracle) return nq_oracle(g, k);
  Network net(g, cfg, seed);
  return nq_distributed(net, k);
}

}  // namespace hyb
