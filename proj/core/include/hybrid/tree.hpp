#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hybrid/network.hpp"

namespace hyb {

// Rooted forest over a member subset of the nodes. Most uses have a single
// root; build_component_forest produces one tree per component.
struct VirtualTree {
  std::size_t n = 0;
  std::vector<char> member;
  std::vector<NodeId> parent;                 // kNoNode for roots and non-members
  std::vector<std::vector<NodeId>> children;  // sorted by id
  std::vector<NodeId> roots;
  std::vector<std::uint32_t> level;           // distance to own root
  std::uint32_t depth = 0;
  std::uint32_t degree_bound = 0;

  NodeId root() const { return roots.empty() ? kNoNode : roots.front(); }
  std::size_t size() const;
  std::vector<NodeId> members() const;
  std::uint32_t max_degree() const;
  std::uint32_t max_children() const;
  // Index of v among its parent's children.
  std::uint32_t child_index(NodeId v) const;

  // Builds children/levels from parent pointers and checks acyclicity.
  static VirtualTree from_parents(const Graph& g, std::vector<char> member, std::vector<NodeId> parent);
  // Throws std::logic_error when the structure is not a rooted forest
  // spanning exactly the members.
  void certify() const;
  std::string to_json(const Graph& g) const;
};

// Tree over all nodes. HYBRID: heap order on ids, zero rounds. HYBRID0:
// component merging with Euler-tour list ranking, rooted at the highest id.
VirtualTree build_virtual_tree(Network& net);
// One tree per connected component of the edges accepted by keep_edge.
VirtualTree build_component_forest(Network& net, const std::function<bool(std::uint32_t)>& keep_edge);

VirtualTree prune_tree(Network& net, const VirtualTree& tree, const std::vector<char>& flag);
VirtualTree subset_tree(Network& net, const std::vector<char>& flag);

using AggVal = std::array<std::uint64_t, 2>;

struct AggFn {
  std::function<AggVal(const AggVal&, const AggVal&)> combine;
  std::uint8_t words = 1;
  bool first_is_id = false;  // charge word 0 as an identifier
};

enum class AggOp { Min, Max, Sum32 };
AggFn agg_fn(AggOp op);
std::uint64_t fold(AggOp op, std::uint64_t a, std::uint64_t b);

// Convergecast to each root then broadcast back; every member of a tree ends
// with that tree's aggregate. Non-members get their own input back.
std::vector<AggVal> aggregate_broadcast(Network& net, const VirtualTree& tree, std::vector<AggVal> values,
                                        const AggFn& fn);
std::vector<std::uint64_t> tree_aggregate_broadcast(Network& net, const VirtualTree& tree,
                                                    const std::vector<std::uint64_t>& values, AggOp op);
// Upper bound on the rounds one aggregate_broadcast takes on this tree.
std::uint64_t aggregate_rounds(const Network& net, const VirtualTree& tree);

// Pre-order ranks 0..|members|-1 assigned top-down from subtree sizes. Members
// only; others get kNoNode.
std::vector<std::uint32_t> rank_members(Network& net, const VirtualTree& tree);

}  // namespace hyb
