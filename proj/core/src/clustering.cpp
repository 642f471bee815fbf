#include <algorithm>
#include <cmath>
#include <ostream>

#include "hybrid/distances.hpp"
#include "hybrid/nq.hpp"

namespace hyb {

namespace {

// Marks every node within `radius` hops of the sources. Uses epoch stamps so
// the scratch arrays are shared across many small searches.
class BoundedBfs {
 public:
  explicit BoundedBfs(const Graph& g) : g_(g), stamp_(g.n(), 0), dist_(g.n(), 0) {}

  void run(const std::vector<NodeId>& sources, std::uint32_t radius) {
    ++epoch_;
    queue_.clear();
    for (NodeId s : sources) {
      if (stamp_[s] == epoch_) continue;
      stamp_[s] = epoch_;
      dist_[s] = 0;
      queue_.push_back(s);
    }
    for (std::size_t i = 0; i < queue_.size(); ++i) {
      NodeId u = queue_[i];
      if (dist_[u] == radius) continue;
      for (const Arc& a : g_.adj(u)) {
        if (stamp_[a.to] == epoch_) continue;
        stamp_[a.to] = epoch_;
        dist_[a.to] = dist_[u] + 1;
        queue_.push_back(a.to);
      }
    }
  }
  bool reached(NodeId v) const { return stamp_[v] == epoch_; }

 private:
  const Graph& g_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> dist_;
  std::vector<NodeId> queue_;
  std::uint32_t epoch_ = 0;
};

// R(S) over keys restricted to bits [0, bit]: split by `bit`, recurse, then
// keep the R1 members at distance >= alpha from R0.
std::vector<NodeId> bitwise_rs(BoundedBfs& bfs, std::vector<NodeId> s, const std::vector<std::uint64_t>& keys,
                               int bit, std::uint32_t alpha) {
  if (s.size() <= 1 || bit < 0) return s;
  std::vector<NodeId> s0, s1;
  for (NodeId v : s) ((keys[v] >> bit) & 1 ? s1 : s0).push_back(v);
  auto r0 = bitwise_rs(bfs, std::move(s0), keys, bit - 1, alpha);
  auto r1 = bitwise_rs(bfs, std::move(s1), keys, bit - 1, alpha);
  if (r0.empty()) return r1;
  if (r1.empty() || alpha <= 1) {
    r0.insert(r0.end(), r1.begin(), r1.end());
    return r0;
  }
  bfs.run(r0, alpha - 1);
  for (NodeId v : r1)
    if (!bfs.reached(v)) r0.push_back(v);
  return r0;
}

// Nearest ruler by hops, ties to the smaller ruler id.
std::vector<NodeId> voronoi(const Graph& g, const std::vector<NodeId>& rulers, std::uint32_t* radius) {
  const std::size_t n = g.n();
  std::vector<NodeId> owner(n, kNoNode);
  std::vector<std::uint32_t> dist(n, kUnreached);
  std::vector<NodeId> frontier = rulers;
  for (NodeId r : rulers) {
    owner[r] = r;
    dist[r] = 0;
  }
  std::uint32_t d = 0;
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (const Arc& a : g.adj(u)) {
        NodeId w = a.to;
        if (dist[w] == kUnreached) {
          dist[w] = d + 1;
          owner[w] = owner[u];
          next.push_back(w);
        } else if (dist[w] == d + 1 && g.id(owner[u]) < g.id(owner[w])) {
          owner[w] = owner[u];
        }
      }
    }
    if (!next.empty()) ++d;
    frontier = std::move(next);
  }
  if (radius) *radius = d;
  return owner;
}

Clustering assemble(const Graph& g, std::uint64_t k, std::uint32_t nq, const std::vector<NodeId>& owner,
                    std::uint32_t radius) {
  const std::size_t n = g.n();
  Clustering c;
  c.k = k;
  c.nq = nq;
  c.diameter_bound = 4ull * nq * ceil_log2(n);
  c.size_lo = static_cast<double>(k) / nq;
  c.size_hi = 2.0 * static_cast<double>(k) / nq;
  c.radius = radius;
  c.cluster.assign(n, 0);

  std::vector<std::vector<NodeId>> cells(n);
  for (NodeId v = 0; v < n; ++v) cells[owner[v]].push_back(v);
  auto by_id = [&](NodeId a, NodeId b) { return g.id(a) < g.id(b); };
  std::vector<NodeId> rulers;
  for (NodeId v = 0; v < n; ++v)
    if (!cells[v].empty()) rulers.push_back(v);
  std::sort(rulers.begin(), rulers.end(), by_id);

  const double lo = c.size_lo;
  const std::uint64_t width = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(c.size_hi)));
  for (NodeId r : rulers) {
    auto& cell = cells[r];
    std::sort(cell.begin(), cell.end(), by_id);
    const std::uint64_t s = cell.size();
    std::uint64_t q = 1;
    if (static_cast<double>(s) > c.size_hi) {
      q = ceil_div(s, width);
      // Balanced cut; fall back to fewer chunks while the smallest is too small.
      while (q > 1 && static_cast<double>(s / q) < lo) --q;
    }
    std::uint64_t off = 0;
    for (std::uint64_t i = 0; i < q; ++i) {
      std::uint64_t len = s / q + (i < s % q ? 1 : 0);
      std::vector<NodeId> chunk(cell.begin() + off, cell.begin() + off + len);
      off += len;
      NodeId lead = std::find(chunk.begin(), chunk.end(), r) != chunk.end() ? r : chunk.front();
      const auto id = static_cast<std::uint32_t>(c.leader.size());
      for (NodeId v : chunk) c.cluster[v] = id;
      c.leader.push_back(lead);
      c.center.push_back(r);
      c.members.push_back(std::move(chunk));
    }
  }
  return c;
}

}  // namespace

RulingSet ruling_set(const Graph& g, std::uint32_t alpha) {
  if (alpha < 1) throw ConfigError("alpha must be >= 1");
  RulingSet rs;
  rs.alpha = alpha;
  rs.beta = alpha * ceil_log2(g.n());
  std::vector<NodeId> order(g.n());
  for (NodeId v = 0; v < g.n(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return g.id(a) < g.id(b); });
  std::vector<char> blocked(g.n(), 0);
  BoundedBfs bfs(g);
  for (NodeId v : order) {
    if (blocked[v]) continue;
    rs.members.push_back(v);
    if (alpha <= 1) continue;
    bfs.run({v}, alpha - 1);
    for (NodeId u = 0; u < g.n(); ++u)
      if (bfs.reached(u)) blocked[u] = 1;
  }
  return rs;
}

RulingSet ruling_set_bitwise(Network& net, std::uint32_t alpha, const std::vector<std::uint64_t>& keys,
                             std::uint32_t bits) {
  if (alpha < 1) throw ConfigError("alpha must be >= 1");
  const Graph& g = net.graph();
  if (keys.size() != g.n()) throw ConfigError("one key per node required");
  RulingSet rs;
  rs.alpha = alpha;
  rs.beta = (alpha - 1) * bits;
  std::vector<NodeId> all(g.n());
  for (NodeId v = 0; v < g.n(); ++v) all[v] = v;
  BoundedBfs bfs(g);
  rs.members = bitwise_rs(bfs, all, keys, static_cast<int>(bits) - 1, alpha);
  std::sort(rs.members.begin(), rs.members.end());
  // Sub-problems of one bit level run in parallel; each merge floods alpha-1
  // hops from R0 plus one round to settle.
  net.local_rounds(static_cast<std::uint64_t>(bits) * alpha);
  return rs;
}

RulingSetCheck verify_ruling_set(const Graph& g, const RulingSet& rs) {
  RulingSetCheck c;
  c.min_spacing = kUnreached;
  for (NodeId w : rs.members) {
    auto d = bfs_hops(g, w, rs.alpha);
    for (NodeId u : rs.members)
      if (u != w && d[u] != kUnreached) c.min_spacing = std::min(c.min_spacing, d[u]);
  }
  c.spacing = c.min_spacing == kUnreached || c.min_spacing >= rs.alpha;
  auto d = bfs_hops_multi(g, rs.members);
  for (auto x : d) c.max_distance = std::max(c.max_distance, x);
  c.domination = c.max_distance <= rs.beta;
  return c;
}

void Clustering::to_csv(std::ostream& os, const Graph& g) const {
  os << "node,cluster,leader\n";
  for (NodeId v = 0; v < cluster.size(); ++v) os << g.id(v) << ',' << cluster[v] << ',' << g.id(leader_of(v)) << '\n';
}

Clustering cluster_partition(const Graph& g, std::uint64_t k) {
  if (k < 1 || k > g.n()) throw ConfigError("cluster_partition needs 1 <= k <= n");
  auto nq = nq_oracle(g, k);
  auto rs = ruling_set(g, 2 * nq.value + 1);
  std::uint32_t radius = 0;
  auto owner = voronoi(g, rs.members, &radius);
  return assemble(g, k, nq.value, owner, radius);
}

Clustering cluster_partition(Network& net, std::uint64_t k, const NqReport* given, const VirtualTree* tree) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (k < 1 || k > n) throw ConfigError("cluster_partition needs 1 <= k <= n");
  const std::uint64_t start = net.rounds();
  VirtualTree own_tree;
  if (!tree) {
    own_tree = build_virtual_tree(net);
    tree = &own_tree;
  }
  NqReport own;
  if (!given) {
    own = nq_distributed(net, k, tree);
    given = &own;
  }
  const std::uint32_t nq = given->value;
  net.begin_phase("clustering");

  // Distinct keys of ceil(log2 n) bits: ids in HYBRID, overlay ranks otherwise.
  const std::uint32_t bits = std::max<std::uint32_t>(1, ceil_log2(n));
  std::vector<std::uint64_t> keys(n);
  bool small_ids = true;
  for (NodeId v = 0; v < n; ++v) small_ids = small_ids && g.id(v) < n;
  if (net.hybrid0() || !small_ids) {
    auto rank = rank_members(net, *tree);
    for (NodeId v = 0; v < n; ++v) keys[v] = rank[v];
  } else {
    for (NodeId v = 0; v < n; ++v) keys[v] = g.id(v);
  }
  auto rs = ruling_set_bitwise(net, 2 * nq + 1, keys, bits);

  std::uint32_t radius = 0;
  auto owner = voronoi(g, rs.members, &radius);
  // Rulers flood their id for beta rounds; every node adopts the first
  // arrival. Rulers then gather their cell, cut it and send assignments back.
  const std::uint64_t beta = std::max<std::uint32_t>(rs.beta, 1);
  net.local_rounds(beta);
  net.local_rounds(2 * beta);
  // The actual cell radius bounds later gathers.
  auto dist = bfs_hops_multi(g, rs.members);
  std::vector<std::uint64_t> dv(dist.begin(), dist.end());
  auto rad = tree_aggregate_broadcast(net, *tree, dv, AggOp::Max);
  if (rad[tree->root()] != radius) throw std::logic_error("cell radius mismatch");

  Clustering c = assemble(g, k, nq, owner, radius);
  for (std::size_t i = 0; i < c.count(); ++i) {
    Ident lid = g.id(c.leader[i]);
    for (NodeId v : c.members[i]) net.learn(v, lid);
  }
  c.rounds = net.rounds() - start;
  return c;
}

ClusterCheck verify_clustering(const Graph& g, const Clustering& c) {
  ClusterCheck r;
  const std::size_t n = g.n();
  if (c.cluster.size() != n || c.members.size() != c.leader.size()) {
    r.partition = false;
    return r;
  }
  std::vector<int> seen(n, 0);
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    const auto& m = c.members[i];
    if (std::find(m.begin(), m.end(), c.leader[i]) == m.end()) r.one_leader = false;
    for (NodeId v : m) {
      ++seen[v];
      if (c.cluster[v] != i) r.partition = false;
    }
  }
  for (int s : seen)
    if (s != 1) r.partition = false;

  const std::uint64_t hi = static_cast<std::uint64_t>(std::ceil(c.size_hi - 1e-9));
  r.min_size = n;
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    const auto& m = c.members[i];
    r.min_size = std::min(r.min_size, m.size());
    r.max_size = std::max(r.max_size, m.size());
    if (static_cast<double>(m.size()) + 1e-9 < c.size_lo || m.size() > hi) r.size_ok = false;
    if (static_cast<double>(m.size()) > c.size_hi + 1e-9) ++r.strict_upper;
    auto dl = bfs_hops(g, c.leader[i]);
    for (NodeId v : m) r.max_leader_distance = std::max<std::uint64_t>(r.max_leader_distance, dl[v]);
    for (NodeId u : m) {
      auto d = bfs_hops(g, u);
      for (NodeId v : m) r.max_weak_diameter = std::max<std::uint64_t>(r.max_weak_diameter, d[v]);
    }
  }
  r.diameter_ok = r.max_weak_diameter <= c.diameter_bound && r.max_leader_distance <= c.diameter_bound;
  return r;
}

}  // namespace hyb
