#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hybrid/hashing.hpp"
#include "hybrid/network.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/tree.hpp"

namespace hyb {

// Join constant of the helper and consolidation sampling rates.
inline constexpr double kHelperC = 1.0;
// Membership certificate: every node is in at most kMembershipC * log2 n sets.
inline constexpr double kMembershipC = 12.0;
// Hop certificate: helpers lie within kHopC * NQ * log2 n hops of their owner.
inline constexpr double kHopC = 4.0;

struct HelperAssignment {
  std::uint64_t k = 0;
  std::uint32_t nq = 0;
  std::vector<NodeId> W;
  std::vector<std::vector<NodeId>> helpers;  // per entry of W, sorted
  std::vector<std::uint32_t> membership;     // per node
  std::vector<double> join_prob;             // per cluster
  bool precondition_flag = false;            // |W| above the allowed sampling rate
  std::size_t min_size = 0;
  std::uint32_t max_hop = 0;
  std::uint32_t max_membership = 0;
  std::uint64_t rounds = 0;

  double size_bound() const { return nq == 0 ? 0.0 : static_cast<double>(k) / nq; }
  double hop_bound(std::size_t n) const;
  double membership_bound(std::size_t n) const;
  bool size_ok() const { return W.empty() || min_size >= size_bound(); }
  bool hop_ok(std::size_t n) const { return max_hop <= hop_bound(n); }
  bool membership_ok(std::size_t n) const { return max_membership <= membership_bound(n); }
  bool ok(std::size_t n) const { return size_ok() && hop_ok(n) && membership_ok(n); }
};

// Distributed NQ_k, clustering, then every node of a cluster C joins H_w for
// each w in C with probability min(1, (k/NQ) (1/|C|) 8c ln n).
HelperAssignment adaptive_helpers(Network& net, const std::vector<NodeId>& W, std::uint64_t k,
                                  double c = kHelperC);
HelperAssignment adaptive_helpers(Network& net, const std::vector<NodeId>& W, std::uint64_t k,
                                  const Clustering& clusters, double c = kHelperC);

// Max bin load that a kappa-wise independent balls-into-bins process with
// M balls and n bins stays below w.h.p.
double balls_in_bins_bound(std::uint64_t balls, std::uint64_t bins);

struct IntermediateMap {
  HashFamilyMember h;
  std::uint32_t kappa = 0;
  bool constraint_flag = false;  // k * l above NQ_k * n
  std::uint64_t rounds = 0;

  NodeId node(const Graph& g, Ident i, Ident j) const;
};

// The root of the overlay samples the coefficients and spreads them with
// k-dissemination; every node ends with the same function.
IntermediateMap intermediate_map(Network& net, std::uint64_t k, std::uint64_t l, std::uint32_t nq);
IntermediateMap intermediate_map(Network& net, std::uint64_t k, std::uint64_t l);
// Pairs per node for the given id pairs.
std::vector<std::uint64_t> intermediate_loads(const Graph& g, const IntermediateMap& m,
                                              const std::vector<std::pair<Ident, Ident>>& pairs);

enum class Scenario { ArbSrcRandTgt = 1, RandSrcArbTgt = 2, RandSrcRandTgt = 3 };
std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& s);

struct Demand {
  NodeId s = 0;
  NodeId t = 0;
  std::uint64_t payload = 0;
};

enum class Selection { Random, Arbitrary, List };

struct RoutingInstance {
  Scenario scenario = Scenario::RandSrcRandTgt;
  std::uint64_t k = 0;  // nominal source count (sampling rate k/n when random)
  std::uint64_t l = 0;
  std::vector<NodeId> sources;  // sorted
  std::vector<NodeId> targets;  // sorted
  std::vector<Demand> demands;
  std::uint32_t payload_bits = 1;

  // Every source has one message for every target. Random sets keep each node
  // with probability k/n (l/n); arbitrary sets are the first k (l) nodes.
  static RoutingInstance make(const Network& net, Scenario sc, std::uint64_t k, std::uint64_t l, std::uint64_t seed,
                              std::uint32_t payload_bits = 0);
  static RoutingInstance make(const Network& net, Scenario sc, Selection src, Selection tgt, std::uint64_t k,
                              std::uint64_t l, std::uint64_t seed, std::uint32_t payload_bits = 0);
  static RoutingInstance complete(const Network& net, Scenario sc, std::vector<NodeId> S, std::vector<NodeId> T,
                                  std::uint64_t seed, std::uint32_t payload_bits = 0);
  // JSON: {"scenario": 1|2|3, "k": .., "l": .., "sources": "random"|"arbitrary"|[ids],
  //        "targets": ..., "seed": .., "payload_bits": ..}
  static RoutingInstance from_json(const Network& net, const std::string& text);
  void validate(const Network& net) const;
};

struct ScenarioCheck {
  std::uint32_t nq_k = 0;
  std::uint32_t nq_l = 0;
  bool ok = true;
  std::string reason;
};
ScenarioCheck check_scenario(const RoutingInstance& inst, std::uint32_t nq_k, std::uint32_t nq_l, std::size_t n);

struct Consolidation {
  bool identity = true;
  double bound = 0;                       // sqrt(n * NQ_k)
  double p = 1, q = 1;                    // super-source and sub-target rates
  std::vector<NodeId> super_sources;
  std::vector<NodeId> sub_targets;
  std::vector<NodeId> collector;          // per node: super source collecting its messages
  std::vector<std::vector<NodeId>> assigned;  // per target node: its sub-targets
  std::vector<RoutingInstance> parts;
  std::vector<std::vector<std::size_t>> origin;  // [part][demand] -> original demand index
  bool every_cluster_covered = true;      // each cluster with sources holds a super source
  std::size_t promoted = 0;               // clusters patched by promoting a source
  bool precondition_flag = false;
  std::uint64_t rounds = 0;

  std::size_t max_k() const;
  std::size_t max_l() const;
};

// Splits a case-3 instance with many sources into instances whose source and
// target sets stay below sqrt(n * NQ_k). Identity when k is already small.
Consolidation consolidate_sources(Network& net, const RoutingInstance& inst, const Clustering& clusters,
                                  double c = kHelperC);
Consolidation consolidate_sources(Network& net, const RoutingInstance& inst, double c = kHelperC);

struct RoutingResult {
  ScenarioCheck scenario;
  bool reversed = false;
  std::size_t parts = 1;
  std::uint64_t rounds = 0;
  std::vector<std::vector<std::pair<Ident, std::uint64_t>>> received;  // per node: (source id, payload)
  std::uint32_t max_membership = 0;
  double membership_bound = 0;
  bool helpers_ok = true;
  std::uint64_t max_load = 0;       // pairs stored at one intermediate node
  double load_bound = 0;
  bool load_ok = true;
  std::uint32_t recv_window = 0;    // messages per node per logical round
  std::uint64_t undeliverable = 0;  // requests that found nothing stored
};

struct DeliveryCheck {
  std::uint64_t expected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t missing = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t wrong = 0;
  bool exact() const { return missing == 0 && duplicates == 0 && wrong == 0; }
};

RoutingResult kl_route(Network& net, const RoutingInstance& inst);
DeliveryCheck check_delivery(const Graph& g, const RoutingInstance& inst, const RoutingResult& r);

}  // namespace hyb
