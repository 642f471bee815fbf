#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hybrid/network.hpp"
#include "hybrid/tree.hpp"

namespace hyb {

inline constexpr double kForestC = 4.0;
inline constexpr double kColorC = 4.0;
inline constexpr double kVirtualC = 1.0;

// Undirected multigraph; self-loops and parallel edges allowed.
struct Multigraph {
  struct E {
    NodeId u, v;
    std::uint32_t gedge = std::numeric_limits<std::uint32_t>::max();  // edge of the host graph, if any
  };
  std::size_t n = 0;
  std::vector<E> edges;

  std::uint32_t add(NodeId u, NodeId v, std::uint32_t gedge = std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> degrees() const;  // a self-loop counts twice
  static Multigraph from_graph(const Graph& g);
};

struct Orientation {
  std::vector<char> forward;  // edge e points u -> v when set
  std::vector<std::uint32_t> indeg, outdeg;

  static Orientation make(const Multigraph& h, std::vector<char> forward);
  bool eulerian() const;
  std::uint64_t imbalance() const;  // sum over nodes of |in - out|
  // One "from to" line per edge, node labels from `label` (indices when empty).
  void write_edges(std::ostream& os, const Multigraph& h, const std::vector<Ident>& label = {}) const;
};

// One Minor-Aggregation round over the network's graph.
struct MinorRoundSpec {
  std::vector<char> contract;                 // per edge of G
  std::vector<std::uint64_t> x;               // per node
  AggOp consensus = AggOp::Min;
  std::vector<std::uint64_t> za, zb;          // per edge: value for the side of edge(e).u / edge(e).v
  AggOp aggregate = AggOp::Sum32;
};

struct MinorRoundResult {
  std::vector<NodeId> supernode;              // per node: smallest member index
  std::vector<std::uint64_t> y;               // per node: consensus of its supernode
  std::vector<std::uint64_t> agg;             // per node: aggregate over incident non-contracted edges
  std::vector<char> has_agg;                  // supernode has at least one such edge
  std::uint64_t rounds = 0;
};

// Components of the contracted edges become overlay trees, the consensus and
// the edge aggregate run over those trees. Self-loops of the contracted graph
// are dropped, parallel edges all count.
MinorRoundResult minor_round(Network& net, const MinorRoundSpec& spec);
MinorRoundResult minor_round_reference(const Graph& g, const MinorRoundSpec& spec);

struct ForestDecomposition {
  Orientation orientation;
  std::uint32_t alpha = 1;
  std::uint32_t bound = 0;        // c_f * alpha, the peeling threshold
  std::uint32_t iterations = 0;
  std::uint32_t max_outdeg = 0;
  std::vector<std::uint32_t> forest;  // per edge: index of its forest (out-edge rank at its tail)
  bool violated = false;              // peeling stalled
  std::vector<NodeId> witness;        // stalled nodes: every one has degree above the threshold
  double witness_density = 0;         // edges / (nodes - 1) of the witness, a lower bound on arboricity
};

// Rounds of peeling every node whose remaining degree is at most c_f * alpha;
// its remaining edges point away from it. Edges between nodes peeled together
// point from the lower to the higher index.
ForestDecomposition forest_decomposition(const Multigraph& g, std::uint32_t alpha, double c_f = kForestC);

struct CycleOrientation {
  Orientation orientation;
  std::vector<std::size_t> sizes;   // live cycle nodes before each contraction step
  std::uint32_t iterations = 0;
  std::uint32_t color_rounds = 0;   // color reduction rounds summed over iterations
  std::uint64_t rounds = 0;
};

// Repeatedly 3-colors the cycles (color reduction on id bit positions), takes
// a maximal independent set and contracts it away until every cycle has at
// most two nodes, then orients and expands back. When `net` is given every
// communication step is charged as one Minor-Aggregation round on it, with the
// host edges of already merged cycle nodes contracted.
CycleOrientation orient_cycles(const Multigraph& h2, Network* net = nullptr);

struct NetworkDecomposition {
  std::uint32_t power = 1;
  double beta = 0.5;
  std::vector<std::uint32_t> cluster;  // per node
  std::vector<std::uint32_t> color;    // per cluster
  std::vector<NodeId> center;          // per cluster
  std::uint32_t colors = 0;
  std::uint32_t chi = 0;               // allowed colors
  std::uint32_t diameter_bound = 0;    // weak diameter in G
  std::uint64_t rounds = 0;

  std::size_t count() const { return center.size(); }
};

// Exponential-shift ball carving on G^power restricted to the uncolored
// nodes; nodes whose power-neighbors all landed in their own cluster take the
// current color, the rest retry. A component of the uncolored power graph with
// small enough diameter becomes one cluster outright.
NetworkDecomposition network_decomposition(const Graph& g, std::uint32_t power, std::uint64_t seed,
                                           double c_chi = kColorC, double beta = 0.5);
NetworkDecomposition network_decomposition(Network& net, std::uint32_t power, double c_chi = kColorC,
                                           double beta = 0.5);

struct DecompositionCheck {
  std::uint32_t max_weak_diameter = 0;
  std::uint32_t min_same_color_gap = std::numeric_limits<std::uint32_t>::max();  // hops in G
  bool diameter_ok = true;
  bool separated = true;  // same-color clusters more than `power` hops apart
  bool colors_ok = true;
  bool ok() const { return diameter_ok && separated && colors_ok; }
};
DecompositionCheck verify_decomposition(const Graph& g, const NetworkDecomposition& d);

struct VirtualNodeSet {
  std::size_t count = 0;
  std::vector<std::pair<std::uint32_t, NodeId>> real_edges;  // (virtual index, real node)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> virtual_edges;

  static double bound(std::size_t n) { return kVirtualC * log_n(n) * log_n(n); }
};

struct EulerResult {
  Multigraph h;                    // real nodes 0..n-1, then the virtual nodes
  Orientation orientation;
  NetworkDecomposition decomposition;
  std::vector<std::size_t> removed_per_class;   // edges oriented by cycle removal
  std::vector<char> class_forest_ok;            // remainder touched by each class is acyclic
  bool even_after_each_class = true;
  std::size_t residual_edges = 0;
  std::size_t split_nodes = 0;                  // degree-2 nodes made from virtual nodes
  ForestDecomposition residual_forests;
  CycleOrientation cycles;
  std::uint64_t rounds = 0;
};

// H is given by edges of G (flags) plus virtual nodes. Throws ConfigError
// naming the first node of odd degree.
EulerResult eulerian_orientation(Network& net, const std::vector<char>& edge_in_h, const VirtualNodeSet& virtuals);

// Even-degree subgraph: XOR of the fundamental cycles of a random half of the
// non-tree edges of a BFS tree.
std::vector<char> even_subgraph(const Graph& g, std::uint64_t seed);
// Flips the degree parity of the listed nodes (taken in consecutive pairs) by
// XOR-ing a shortest path between each pair into the edge flags.
void flip_parity(const Graph& g, std::vector<char>& flags, const std::vector<NodeId>& nodes);

}  // namespace hyb
