#pragma once

#include <string>

#include "hybrid/graph.hpp"

namespace hyb {

Graph make_path(std::size_t n);
Graph make_cycle(std::size_t n);
// d-dimensional grid with side m, L1 adjacency. Node index is the
// mixed-radix coordinate with dimension 0 least significant.
Graph make_grid(std::size_t d, std::size_t m);
// G(n,p) unioned with a random spanning tree when disconnected; the repair
// is recorded in g.meta["connectivity_repair"].
Graph make_erdos_renyi(std::size_t n, double p, std::uint64_t seed);
Graph make_random_tree(std::size_t n, std::uint64_t seed);
Graph make_star(std::size_t n);
Graph make_complete(std::size_t n);

// Uniform integer weights in [1, wmax].
void assign_random_weights(Graph& g, Weight wmax, std::uint64_t seed);
// Distinct ids drawn from [n^c] (HYBRID0 id space).
void assign_random_ids(Graph& g, std::uint32_t c, std::uint64_t seed);

struct GraphSpec {
  std::string kind = "path";  // path|cycle|grid|erdos_renyi|random_tree|star|complete
  std::size_t n = 0;
  std::size_t d = 2;
  std::size_t m = 0;
  double p = 0.1;
  Weight wmax = 1;  // >1 draws random weights
  std::string path;  // kind == "file"
};

Graph generate(const GraphSpec& spec, std::uint64_t seed);
// Parses "path:64", "grid:2x16", "erdos_renyi:128:0.05", "file:<path>", with
// an optional ",w=<wmax>" suffix.
GraphSpec parse_graph_spec(const std::string& text);
Graph graph_from_text(const std::string& text, std::uint64_t seed);

}  // namespace hyb
