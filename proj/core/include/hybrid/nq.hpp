#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hybrid/network.hpp"
#include "hybrid/tree.hpp"

namespace hyb {

struct NqReport {
  std::uint64_t k = 0;
  std::vector<std::uint32_t> per_node;
  std::uint32_t value = 0;     // max over nodes
  NodeId argmax = kNoNode;     // smallest-index node attaining the max
  std::uint32_t diameter = 0;
  std::uint64_t rounds = 0;    // distributed mode only

  void to_csv(std::ostream& os, const Graph& g) const;
};

// Smallest t >= 1 with t * |B_t(v)| >= k, capped at the diameter (at least 1).
std::uint32_t nq_node(const Graph& g, std::uint64_t k, NodeId v);
std::uint32_t nq_node(const Graph& g, std::uint64_t k, NodeId v, std::uint32_t diameter);

NqReport nq_oracle(const Graph& g, std::uint64_t k);
// Grows balls one hop per round and aggregates N_t = min_v |B_t(v)| over the
// overlay tree until N_t >= k/t or N_t = n.
NqReport nq_distributed(Network& net, std::uint64_t k, const VirtualTree* tree = nullptr);

enum class NqMode { Oracle, Distributed };
NqReport nq_graph(const Graph& g, std::uint64_t k, NqMode mode, const ModelConfig& cfg = {},
                  std::uint64_t seed = 1);

struct RulingSet {
  std::uint32_t alpha = 1;
  std::uint32_t beta = 0;  // declared domination radius
  std::vector<NodeId> members;
};

// Sequential greedy over ascending ids; actual domination radius alpha-1.
RulingSet ruling_set(const Graph& g, std::uint32_t alpha);
// Recursive construction over the bits of distinct keys (ids in HYBRID,
// overlay ranks in HYBRID0): R = R0 + {r in R1 : dist(r, R0) >= alpha}.
// Domination radius (alpha-1) * bits; alpha local rounds per bit.
RulingSet ruling_set_bitwise(Network& net, std::uint32_t alpha, const std::vector<std::uint64_t>& keys,
                             std::uint32_t bits);

struct RulingSetCheck {
  bool spacing = true;
  bool domination = true;
  std::uint32_t min_spacing = 0;
  std::uint32_t max_distance = 0;
};
RulingSetCheck verify_ruling_set(const Graph& g, const RulingSet& rs);

struct Clustering {
  std::uint64_t k = 0;
  std::uint32_t nq = 0;
  std::vector<std::uint32_t> cluster;        // per node
  std::vector<NodeId> leader;                // per cluster
  std::vector<NodeId> center;                // ruler whose cell the cluster was cut from
  std::vector<std::vector<NodeId>> members;  // per cluster, sorted by id
  std::uint64_t diameter_bound = 0;          // 4 * nq * ceil(log2 n)
  double size_lo = 0, size_hi = 0;           // k/nq, 2k/nq
  std::uint32_t radius = 0;                  // max hops from a node to its center
  std::uint64_t rounds = 0;

  std::size_t count() const { return leader.size(); }
  NodeId leader_of(NodeId v) const { return leader[cluster[v]]; }
  void to_csv(std::ostream& os, const Graph& g) const;
};

// Centralized reference: greedy ruling set, Voronoi cells, deterministic split.
Clustering cluster_partition(const Graph& g, std::uint64_t k);
// In-model: distributed NQ (unless given), bitwise ruling set, Voronoi
// flooding and leader-side splitting, all charged to the network. The
// overlay tree is built when not given.
Clustering cluster_partition(Network& net, std::uint64_t k, const NqReport* nq = nullptr,
                             const VirtualTree* tree = nullptr);

struct ClusterCheck {
  bool partition = true;
  bool one_leader = true;
  bool diameter_ok = true;
  bool size_ok = true;          // k/nq <= |C| <= ceil(2k/nq)
  std::size_t strict_upper = 0; // clusters above 2k/nq (integer infeasibility)
  std::uint64_t max_weak_diameter = 0;
  std::uint64_t max_leader_distance = 0;
  std::size_t min_size = 0, max_size = 0;
  bool ok() const { return partition && one_leader && diameter_ok && size_ok; }
};
ClusterCheck verify_clustering(const Graph& g, const Clustering& c);

}  // namespace hyb
