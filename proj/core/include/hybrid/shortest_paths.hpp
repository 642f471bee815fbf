#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hybrid/network.hpp"
#include "hybrid/routing.hpp"
#include "hybrid/skeleton.hpp"
#include "hybrid/spanner.hpp"

namespace hyb {

struct DistanceEstimate {
  std::vector<NodeId> sources;
  std::vector<std::vector<Weight>> est;  // [source][node]
  std::vector<NodeId> scope;             // nodes with an estimate; empty means all
  double stretch = 1.0;                  // declared bound
  bool degenerate = false;
  std::uint64_t rounds = 0;

  // source,target,estimate,oracle,ratio with ids; oracle by Dijkstra.
  void to_csv(std::ostream& os, const Graph& g) const;
};

struct StretchReport {
  std::size_t pairs = 0;
  std::size_t underestimates = 0;
  std::size_t violations = 0;   // estimate above bound * d
  std::size_t unreached = 0;    // infinite estimate for a connected pair
  double max_ratio = 1.0;
  bool ok() const { return underestimates == 0 && violations == 0 && unreached == 0; }
};
StretchReport check_stretch(const Graph& g, const DistanceEstimate& e, double bound);
inline StretchReport check_stretch(const Graph& g, const DistanceEstimate& e) {
  return check_stretch(g, e, e.stretch);
}

enum class SsspMode { InModel, Oracle };
SsspMode parse_sssp_mode(const std::string& s);
enum class SourceMode { Random, Arbitrary };
SourceMode parse_source_mode(const std::string& s);

// Hop-staged Bellman-Ford: h local rounds of d^h from every source, Bellman-Ford
// over skeleton edges until an aggregation reports no change, then h local
// rounds combining d_S(s,u) + d^h(u,v). All sources run in parallel.
DistanceEstimate sssp_staged(Network& net, const SkeletonGraph& s, const std::vector<NodeId>& sources);

// Skeleton for shortest path subroutines: x = sqrt(n).
SkeletonGraph default_skeleton(Network& net);

DistanceEstimate sssp(Network& net, NodeId source, double eps, SsspMode mode = SsspMode::InModel);

// Sources must lie in the skeleton. Runs one Bellman-Ford program per source
// through schedule_on_skeleton, then every node combines d^h to nearby
// skeleton nodes with the skeleton distances.
DistanceEstimate skeleton_kssp(Network& net, const SkeletonGraph& s, const std::vector<NodeId>& sources);

DistanceEstimate k_ssp(Network& net, const std::vector<NodeId>& S, double eps, SourceMode mode);

struct KlSpResult {
  DistanceEstimate estimate;     // rows: targets, scope: sources
  std::uint32_t nq_k = 0;
  bool constraints_ok = true;
  std::string reason;
  std::size_t chunks = 1;        // routing instances per value
  std::size_t mislabeled = 0;    // values missing, duplicated or not matching the sender
  RoutingResult last_route;
};

// case 1: arbitrary sources, random targets, SSSP from every target.
// case 2: random sources and targets, k-SSP from the targets.
// Sources then route their estimates to the targets.
KlSpResult kl_sp(Network& net, const std::vector<NodeId>& S, const std::vector<NodeId>& T, double eps,
                 int kase, std::uint64_t seed = 1);

// Unweighted: cluster leaders run SSSP, every node learns its x-ball and every
// node's nearest leader. Declared stretch 1 + 3 eps + eps^2.
DistanceEstimate apsp_unweighted(Network& net, double eps);
// Runs the above with eps / 4 so the declared stretch is at most 1 + eps.
DistanceEstimate apsp_unweighted_eps(Network& net, double eps);
// Spanner with kappa = ceil(eps log2 n / 2) made known to all nodes.
DistanceEstimate apsp_weighted_spanner(Network& net, double eps);
// Skeleton at rate 1/t, (2 alpha - 1)-spanner on it made known to all nodes,
// every node tags its closest skeleton node. Declared stretch 4 alpha - 1.
DistanceEstimate apsp_weighted_skeleton(Network& net, std::uint32_t alpha);

}  // namespace hyb
