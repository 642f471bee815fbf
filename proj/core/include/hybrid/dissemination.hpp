#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hybrid/network.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/tree.hpp"

namespace hyb {

struct Token {
  Ident origin = 0;        // id of the node that starts with the token
  std::uint32_t seq = 0;   // per-origin sequence number
  std::uint64_t payload = 0;

  bool operator==(const Token&) const = default;
  auto operator<=>(const Token&) const = default;
};

enum class Placement { OneNode, Uniform };
Placement parse_placement(const std::string& s);

struct TokenSet {
  std::vector<Token> tokens;
  std::vector<NodeId> holder;  // initial holder per token
  std::uint32_t payload_bits = 1;

  std::size_t k() const { return tokens.size(); }
  // Random payloads of `payload_bits` bits (0: widest that still fits one
  // global message together with the token id).
  static TokenSet make(const Network& net, std::uint64_t k, Placement p, std::uint64_t seed,
                       std::uint32_t payload_bits = 0, NodeId at = 0);
  // Text form: one "holder_id payload" pair per line.
  static TokenSet from_file(const Graph& g, const std::string& path);
  // Throws ConfigError on duplicate ids, origin/holder mismatch, or tokens
  // that do not fit one global message of the network.
  void validate(const Network& net) const;
};

// Widest payload that fits one message next to (origin id, seq) for k tokens.
std::uint32_t max_payload_bits(const Network& net, std::uint64_t k);

// Clusters chained along a tree over their leaders. Every cluster carries an
// internal heap-shaped tree of `slots` slots; slot i of a cluster is matched
// with slot i of its parent and child clusters.
struct ClusterChain {
  Clustering clusters;
  VirtualTree ctree;                                 // over leader nodes
  std::uint32_t slots = 1;
  std::uint32_t iterations = 1;                      // up/down phase length
  std::uint32_t radius = 1;                          // local gather radius
  std::uint32_t maxc = 1;                            // max children in ctree
  std::vector<std::vector<NodeId>> host;             // [cluster][slot]
  std::vector<std::vector<std::uint8_t>> lslot;      // [cluster][slot] -> 0/1 at its host
  std::vector<std::uint32_t> parent;                 // cluster index, kNone32 for roots
  std::vector<std::vector<std::uint32_t>> kids;      // child clusters, ctree order
  std::vector<std::uint32_t> kid_index;              // index among parent's kids
  std::vector<std::uint32_t> depth;                  // cluster depth in ctree
  std::uint32_t root = 0;
};

// Clustering, cluster tree by pruning `tree` to the leaders, slot hosting and
// the top-down slot matching handshake. All traffic is charged to `net`.
ClusterChain build_cluster_chain(Network& net, std::uint64_t k, const NqReport& nq, const VirtualTree& tree);

// Gathers the items held by `members` at the first member and hands them back
// so that the first `hosts` members (all when 0) hold at most ceil(M/hosts)
// each. Charged as 2 * radius local rounds. Items are opaque indices.
std::vector<std::vector<std::uint32_t>> load_balance(Network& net, const std::vector<NodeId>& members,
                                                     const std::vector<std::vector<std::uint32_t>>& held,
                                                     std::uint32_t radius, std::size_t hosts = 0);

struct DisseminationResult {
  std::uint64_t k = 0;
  std::uint32_t nq = 0;
  std::size_t clusters = 0;
  std::uint32_t slots = 0;
  std::uint32_t iterations = 0;
  std::uint64_t rounds = 0;
  std::uint64_t max_holding = 0;   // tokens per node after any balance step
  bool root_complete = false;      // root cluster held every token before the down phase
  std::vector<Token> tokens;       // token index -> token
  std::vector<std::vector<std::uint64_t>> known;  // per node bitset over token indices

  bool knows(NodeId v, std::size_t i) const { return known[v][i >> 6] >> (i & 63) & 1u; }
  bool complete() const;
  std::vector<Token> output(NodeId v) const;
};

DisseminationResult k_disseminate(Network& net, const TokenSet& tokens);

struct AggregationResult {
  std::uint64_t k = 0;
  std::uint32_t nq = 0;
  std::uint64_t rounds = 0;
  std::vector<std::uint32_t> cluster;              // per node
  std::vector<std::vector<AggVal>> per_cluster;    // what the members of a cluster learned

  const AggVal& value(NodeId v, std::size_t i) const { return per_cluster[cluster[v]][i]; }
};

// k aggregates of two-word values combined by fn. value(v, i) is node v's
// input for function i; identity is the neutral element of fn.
AggregationResult k_aggregate(Network& net, std::uint64_t k,
                              const std::function<AggVal(NodeId, std::uint32_t)>& value, const AggFn& fn,
                              const AggVal& identity);
// Single-word convenience form.
AggregationResult k_aggregate(Network& net, std::uint64_t k,
                              const std::function<std::uint64_t(NodeId, std::uint32_t)>& value, AggOp op);

struct ViaAggregateResult {
  DisseminationResult result;
  std::vector<std::uint32_t> index;  // token -> allocated aggregation index
  std::uint64_t allocation_rounds = 0;
};

// Holders reserve consecutive indices by a weighted pre-order walk over a
// tree of holders, then one k-aggregation with MAX spreads every token.
ViaAggregateResult disseminate_via_aggregate(Network& net, const TokenSet& tokens);

// Every node learns every item. Word j of each item is cut into token-sized
// chunks using the widest word j over all items; tokens go out in batches of
// at most n through k_disseminate. Returns the rounds spent.
std::uint64_t broadcast_values(Network& net, const std::vector<NodeId>& holder,
                               const std::vector<std::vector<std::uint64_t>>& items);

// Reference: every node floods everything it knows over local edges.
DisseminationResult flood_disseminate(Network& net, const TokenSet& tokens);

}  // namespace hyb
