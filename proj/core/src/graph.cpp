#include "hybrid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

namespace hyb {

Graph::Graph(std::size_t n) : adj_(n), ids_(n) {
  for (std::size_t v = 0; v < n; ++v) {
    ids_[v] = v;
    by_id_[v] = static_cast<NodeId>(v);
  }
}

std::uint32_t Graph::add_edge(NodeId u, NodeId v, Weight w) {
  if (u >= n() || v >= n()) throw ConfigError("edge endpoint out of range");
  if (u == v) throw ConfigError("self loop at node " + std::to_string(u));
  if (w == 0) throw ConfigError("edge weight must be positive");
  if (has_edge(u, v))
    throw ConfigError("duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
  auto e = static_cast<std::uint32_t>(edges_.size());
  edges_.push_back({std::min(u, v), std::max(u, v), w});
  auto ins = [&](NodeId a, NodeId b) {
    auto& list = adj_[a];
    auto it = std::lower_bound(list.begin(), list.end(), b,
                               [](const Arc& x, NodeId t) { return x.to < t; });
    list.insert(it, Arc{b, w, e});
  };
  ins(u, v);
  ins(v, u);
  if (w != 1) weighted_ = true;
  return e;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto& list = adj_[u];
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Arc& x, NodeId t) { return x.to < t; });
  return it != list.end() && it->to == v;
}

void Graph::set_weight(std::uint32_t e, Weight w) {
  if (w == 0) throw ConfigError("edge weight must be positive");
  auto& ed = edges_.at(e);
  ed.w = w;
  for (auto& a : adj_[ed.u])
    if (a.edge == e) a.w = w;
  for (auto& a : adj_[ed.v])
    if (a.edge == e) a.w = w;
  if (w != 1) weighted_ = true;
}

Weight Graph::max_weight() const {
  Weight mx = 1;
  for (const auto& e : edges_) mx = std::max(mx, e.w);
  return mx;
}

void Graph::set_ids(std::vector<Ident> ids) {
  if (ids.size() != n()) throw ConfigError("id vector size mismatch");
  std::unordered_map<Ident, NodeId> by;
  for (NodeId v = 0; v < ids.size(); ++v)
    if (!by.emplace(ids[v], v).second) throw ConfigError("node ids not distinct");
  ids_ = std::move(ids);
  by_id_ = std::move(by);
}

NodeId Graph::index_of(Ident id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw ConfigError("unknown node id " + std::to_string(id));
  return it->second;
}

bool Graph::connected() const {
  if (n() == 0) return true;
  std::vector<char> seen(n(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t cnt = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (const auto& a : adj_[v])
      if (!seen[a.to]) {
        seen[a.to] = 1;
        ++cnt;
        stack.push_back(a.to);
      }
  }
  return cnt == n();
}

void Graph::validate(std::uint32_t weight_exponent) const {
  for (NodeId v = 0; v < n(); ++v)
    for (const auto& a : adj_[v])
      if (!has_edge(a.to, v)) throw ConfigError("adjacency not symmetric at " + std::to_string(v));
  if (!connected()) throw ConfigError("graph is not connected");
  double wmax = std::pow(static_cast<double>(std::max<std::size_t>(n(), 2)), weight_exponent);
  for (const auto& e : edges_)
    if (e.w < 1 || static_cast<double>(e.w) > wmax)
      throw ConfigError("edge weight out of range [1, n^" + std::to_string(weight_exponent) + "]");
}

void write_graph(std::ostream& os, const Graph& g) {
  os << g.n() << ' ' << g.m() << ' ' << (g.weighted() ? 1 : 0) << '\n';
  for (NodeId v = 0; v < g.n(); ++v) {
    os << v << ' ' << g.degree(v);
    for (const auto& a : g.adj(v)) {
      os << ' ' << a.to;
      if (g.weighted()) os << ' ' << a.w;
    }
    os << '\n';
  }
}

Graph read_graph(std::istream& is) {
  std::size_t n = 0, m = 0;
  int weighted = 0;
  if (!(is >> n >> m >> weighted) || (weighted != 0 && weighted != 1))
    throw ConfigError("graph header must be \"n m weighted{0|1}\"");
  Graph g(n);
  for (std::size_t line = 0; line < n; ++line) {
    std::size_t v = 0, deg = 0;
    if (!(is >> v >> deg) || v >= n)
      throw ConfigError("bad adjacency line " + std::to_string(line + 2));
    for (std::size_t i = 0; i < deg; ++i) {
      std::size_t u = 0;
      Weight w = 1;
      if (!(is >> u) || (weighted && !(is >> w)) || u >= n)
        throw ConfigError("bad neighbor entry on line " + std::to_string(line + 2));
      if (u == v) throw ConfigError("self loop on line " + std::to_string(line + 2));
      if (g.has_edge(static_cast<NodeId>(v), static_cast<NodeId>(u))) {
        for (const auto& a : g.adj(static_cast<NodeId>(v)))
          if (a.to == u && a.w != w) throw ConfigError("asymmetric weight on line " + std::to_string(line + 2));
        continue;
      }
      g.add_edge(static_cast<NodeId>(v), static_cast<NodeId>(u), w);
    }
  }
  if (g.m() != m)
    throw ConfigError("header declares " + std::to_string(m) + " edges, found " + std::to_string(g.m()));
  g.validate();
  return g;
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file " + path);
  return read_graph(in);
}

void save_graph(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write graph file " + path);
  write_graph(out, g);
}

}  // namespace hyb
