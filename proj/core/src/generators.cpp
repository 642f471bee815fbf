#include "hybrid/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "hybrid/rng.hpp"

namespace hyb {

Graph make_path(std::size_t n) {
  if (n < 1) throw ConfigError("path needs n >= 1");
  Graph g(n);
  for (NodeId v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

Graph make_cycle(std::size_t n) {
  if (n < 3) throw ConfigError("cycle needs n >= 3");
  Graph g = make_path(n);
  g.add_edge(static_cast<NodeId>(n - 1), 0);
  return g;
}

Graph make_grid(std::size_t d, std::size_t m) {
  if (d < 1) throw ConfigError("grid needs d >= 1");
  if (m < 2) throw ConfigError("grid needs m >= 2");
  std::size_t n = 1;
  for (std::size_t i = 0; i < d; ++i) {
    n *= m;
    if (n > (1u << 24)) throw ConfigError("grid too large");
  }
  Graph g(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t stride = 1;
    for (std::size_t i = 0; i < d; ++i) {
      std::size_t coord = (v / stride) % m;
      if (coord + 1 < m) g.add_edge(static_cast<NodeId>(v), static_cast<NodeId>(v + stride));
      stride *= m;
    }
  }
  return g;
}

Graph make_random_tree(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("random_tree needs n >= 1");
  Rng rng(seed, 0x7265);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  Graph g(n);
  for (std::size_t i = 1; i < n; ++i) g.add_edge(order[i], order[rng.below(i)]);
  return g;
}

Graph make_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  if (n < 1) throw ConfigError("erdos_renyi needs n >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("erdos_renyi needs p in (0,1]");
  Rng rng(seed, 0x6572);
  Graph g(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.add_edge(u, v);
  if (g.connected()) {
    g.meta["connectivity_repair"] = "none";
    return g;
  }
  Graph t = make_random_tree(n, seed ^ 0x5bd1e995ULL);
  std::size_t added = 0;
  for (const auto& e : t.edges())
    if (!g.has_edge(e.u, e.v)) {
      g.add_edge(e.u, e.v);
      ++added;
    }
  g.meta["connectivity_repair"] = "spanning_tree_union:" + std::to_string(added);
  return g;
}

Graph make_star(std::size_t n) {
  if (n < 1) throw ConfigError("star needs n >= 1");
  Graph g(n);
  for (NodeId v = 1; v < n; ++v) g.add_edge(0, v);
  return g;
}

Graph make_complete(std::size_t n) {
  if (n < 1) throw ConfigError("complete needs n >= 1");
  Graph g(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

void assign_random_weights(Graph& g, Weight wmax, std::uint64_t seed) {
  if (wmax < 1) throw ConfigError("wmax must be >= 1");
  Rng rng(seed, 0x7767);
  for (std::uint32_t e = 0; e < g.m(); ++e) g.set_weight(e, 1 + rng.below(wmax));
}

void assign_random_ids(Graph& g, std::uint32_t c, std::uint64_t seed) {
  if (c < 1) throw ConfigError("id exponent must be >= 1");
  double range_d = std::pow(static_cast<double>(std::max<std::size_t>(g.n(), 2)), c);
  std::uint64_t range = range_d > 1e18 ? 1000000000000000000ULL : static_cast<std::uint64_t>(range_d);
  if (range < g.n()) range = g.n();
  Rng rng(seed, 0x6964);
  std::unordered_set<Ident> used;
  std::vector<Ident> ids(g.n());
  for (auto& id : ids) {
    do id = rng.below(range);
    while (!used.insert(id).second);
  }
  g.set_ids(std::move(ids));
}

Graph generate(const GraphSpec& s, std::uint64_t seed) {
  Graph g;
  if (s.kind == "path") g = make_path(s.n);
  else if (s.kind == "cycle") g = make_cycle(s.n);
  else if (s.kind == "grid") g = make_grid(s.d, s.m);
  else if (s.kind == "erdos_renyi") g = make_erdos_renyi(s.n, s.p, seed);
  else if (s.kind == "random_tree") g = make_random_tree(s.n, seed);
  else if (s.kind == "star") g = make_star(s.n);
  else if (s.kind == "complete") g = make_complete(s.n);
  else if (s.kind == "file") g = load_graph(s.path);
  else throw ConfigError("unknown graph kind '" + s.kind + "'");
  if (s.wmax > 1) assign_random_weights(g, s.wmax, seed);
  return g;
}

namespace {
std::size_t to_size(const std::string& t, const std::string& what) {
  try {
    std::size_t pos = 0;
    auto v = std::stoull(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " '" + t + "'");
  }
}
}  // namespace

GraphSpec parse_graph_spec(const std::string& text) {
  GraphSpec s;
  std::string body = text;
  auto comma = body.find(",w=");
  if (comma != std::string::npos) {
    s.wmax = to_size(body.substr(comma + 3), "weight bound");
    body = body.substr(0, comma);
  }
  std::vector<std::string> parts;
  std::stringstream ss(body);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty()) throw ConfigError("empty graph spec");
  s.kind = parts[0];
  if (s.kind == "file") {
    if (parts.size() < 2) throw ConfigError("file spec needs a path");
    s.path = body.substr(5);
    return s;
  }
  static const std::set<std::string> kinds = {"path", "cycle", "grid", "erdos_renyi", "random_tree", "star", "complete"};
  if (!kinds.count(s.kind)) throw ConfigError("unknown graph kind '" + s.kind + "'");
  if (parts.size() < 2) throw ConfigError("graph spec '" + text + "' needs a size");
  if (s.kind == "grid") {
    auto x = parts[1].find('x');
    if (x == std::string::npos) throw ConfigError("grid spec must look like grid:<d>x<m>");
    s.d = to_size(parts[1].substr(0, x), "grid dimension");
    s.m = to_size(parts[1].substr(x + 1), "grid side");
    return s;
  }
  s.n = to_size(parts[1], "node count");
  if (s.kind == "erdos_renyi") {
    if (parts.size() < 3) throw ConfigError("erdos_renyi spec needs p");
    try {
      s.p = std::stod(parts[2]);
    } catch (const std::exception&) {
      throw ConfigError("bad probability '" + parts[2] + "'");
    }
  }
  return s;
}

Graph graph_from_text(const std::string& text, std::uint64_t seed) {
  return generate(parse_graph_spec(text), seed);
}

}  // namespace hyb
