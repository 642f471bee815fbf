#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybrid/common.hpp"

namespace hyb {

struct Arc {
  NodeId to;
  Weight w;
  std::uint32_t edge;
};

struct Edge {
  NodeId u, v;
  Weight w;
};

// Undirected simple graph with dense node indices and separate identifiers.
// Adjacency lists are kept sorted by neighbor index.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);

  std::size_t n() const { return adj_.size(); }
  std::size_t m() const { return edges_.size(); }
  bool weighted() const { return weighted_; }

  // Returns the edge index. Throws on self loops and duplicates.
  std::uint32_t add_edge(NodeId u, NodeId v, Weight w = 1);
  bool has_edge(NodeId u, NodeId v) const;
  void set_weight(std::uint32_t e, Weight w);

  std::span<const Arc> adj(NodeId v) const { return adj_[v]; }
  std::size_t degree(NodeId v) const { return adj_[v].size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::uint32_t e) const { return edges_[e]; }
  Weight max_weight() const;

  Ident id(NodeId v) const { return ids_[v]; }
  const std::vector<Ident>& ids() const { return ids_; }
  void set_ids(std::vector<Ident> ids);
  NodeId index_of(Ident id) const;
  bool has_id(Ident id) const { return by_id_.count(id) != 0; }

  bool connected() const;
  // Throws ConfigError describing the first broken invariant.
  void validate(std::uint32_t weight_exponent = 3) const;

  // Free-form generator metadata (e.g. connectivity repair).
  std::map<std::string, std::string> meta;

 private:
  std::vector<std::vector<Arc>> adj_;
  std::vector<Edge> edges_;
  std::vector<Ident> ids_;
  std::unordered_map<Ident, NodeId> by_id_;
  bool weighted_ = false;
};

// Text format: header "n m weighted{0|1}", then one line per node
// "v deg u1 [w1] u2 [w2] ...". Ids are the dense indices.
void write_graph(std::ostream& os, const Graph& g);
Graph read_graph(std::istream& is);
Graph load_graph(const std::string& path);
void save_graph(const std::string& path, const Graph& g);

}  // namespace hyb
