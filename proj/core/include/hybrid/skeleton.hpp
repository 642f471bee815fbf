#pragma once

#include <memory>
#include <vector>

#include "hybrid/network.hpp"
#include "hybrid/program.hpp"
#include "hybrid/routing.hpp"

namespace hyb {

// Hop constant of the skeleton: h = ceil(xi * x * ln n).
inline constexpr double kSkeletonXi = 4.0;

struct SkeletonGraph {
  double x = 1;
  double xi = kSkeletonXi;
  std::uint32_t h = 1;
  std::vector<NodeId> nodes;              // sorted indices of V_S in G
  std::vector<std::uint32_t> index;       // G index -> skeleton index, kNone32 outside
  Graph graph;                            // over V_S, ids copied from G
  std::vector<std::vector<Weight>> dh;    // [skeleton index][G node] h-hop distance
  std::uint32_t resamples = 0;
  std::uint64_t rounds = 0;

  bool contains(NodeId v) const { return index[v] != kNone32; }
  std::size_t size() const { return nodes.size(); }
};

// Every node joins with probability 1/x (resampled while empty); skeleton
// edges connect members within h hops and weigh d^h. Charged h local rounds.
SkeletonGraph build_skeleton(Network& net, double x, double xi = kSkeletonXi);
// Same construction over a fixed node set (used when sources join V_S).
SkeletonGraph skeleton_over(Network& net, std::vector<NodeId> nodes, double x, double xi = kSkeletonXi);

// h-hop distances from every node; exact Dijkstra rows when h >= n - 1.
std::vector<std::vector<Weight>> hop_limited_rows(const Graph& g, const std::vector<NodeId>& from,
                                                  std::uint32_t h);

struct SkeletonCheck {
  std::size_t pairs = 0;
  std::size_t mismatches = 0;   // d_S != d_G
  std::size_t unhit = 0;        // pairs with an h-node window avoiding V_S
  bool edges_exact = true;      // edge set and weights equal d^h
};
// Compares skeleton distances with the oracle on `pairs` random skeleton
// pairs and tests the hitting property on shortest paths of random node pairs.
SkeletonCheck verify_skeleton(const Graph& g, const SkeletonGraph& s, std::size_t pairs, std::uint64_t seed);

struct KSHelperSets {
  double x = 1;
  std::uint32_t mu = 1;
  std::vector<NodeId> W;
  std::vector<std::vector<NodeId>> helpers;  // per entry of W, sorted
  std::vector<std::uint32_t> membership;     // per node
  std::size_t min_size = 0;
  std::uint32_t max_hop = 0;
  std::uint32_t max_membership = 0;
  bool precondition_flag = false;            // W denser than 1/x
  std::uint64_t rounds = 0;

  double membership_bound(std::size_t n) const { return kMembershipC * log_n(n); }
  bool size_ok() const { return W.empty() || min_size >= mu; }
  bool hop_ok() const { return max_hop <= mu; }
  bool membership_ok(std::size_t n) const { return max_membership <= membership_bound(n); }
  bool ok(std::size_t n) const { return size_ok() && hop_ok() && membership_ok(n); }
};

// mu = ceil(x); every node u in B_mu(w) joins H_w with probability
// min(1, 8c ln n * mu / |B_mu(w)|). When that ball has fewer than mu nodes
// the whole ball is taken. Charged 2 * mu local rounds.
KSHelperSets helper_sets_ks(Network& net, const std::vector<NodeId>& W, double x, double c = kHelperC);

struct ScheduleResult {
  std::size_t k = 0;
  std::uint64_t sim_rounds = 0;              // longest solo run
  std::uint32_t jobs = 0;                    // programs per helper
  std::uint32_t pair_hops = 0;               // local rounds per simulated round
  std::vector<std::vector<std::string>> outputs;  // [program][skeleton node]
  std::vector<Transcript> solo;              // transcripts of the direct runs
  KSHelperSets helpers;
  std::uint32_t peak_sends = 0;              // global sends per helper per simulated round
  std::uint32_t peak_recvs = 0;
  std::uint64_t rounds = 0;
};

// Runs k programs on the skeleton at once. Program i of node u runs at helper
// H_u[i / jobs]; each simulated round costs the local hops between paired
// helpers plus one exchange carrying every global message of that round.
ScheduleResult schedule_on_skeleton(Network& net, const SkeletonGraph& s,
                                    const std::vector<NodeProgram*>& programs, double gamma,
                                    std::uint64_t budget, std::uint64_t seed);

// Exact Bellman-Ford from the nodes listed with initial distances; local
// messages carry (distance), halts after `rounds` rounds and outputs the
// final distance ("inf" when unreached).
class BellmanFordProgram : public NodeProgram {
 public:
  BellmanFordProgram(std::vector<Weight> init, std::uint64_t rounds);
  void init(NodeContext& ctx) override;
  void on_round(NodeContext& ctx, std::span<const LocalEnvelope> local,
                std::span<const Envelope> global) override;
  const std::vector<Weight>& dist() const { return dist_; }

 private:
  std::vector<Weight> init_;
  std::vector<Weight> dist_;
  std::vector<char> dirty_;
  std::uint64_t rounds_;
};

// Reads the outputs of BellmanFordProgram.
std::vector<Weight> parse_distances(const std::vector<std::string>& out);

}  // namespace hyb
