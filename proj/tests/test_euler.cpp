#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "hybrid/euler.hpp"
#include "hybrid/generators.hpp"
#include "support.hpp"

using namespace hyb;

namespace {

// In minus out at every node, recomputed from the edge list.
std::vector<long> balance(const Multigraph& h, const Orientation& o) {
  std::vector<long> b(h.n, 0);
  for (std::size_t e = 0; e < h.edges.size(); ++e) {
    auto [u, v, _] = h.edges[e];
    NodeId from = o.forward[e] ? u : v, to = o.forward[e] ? v : u;
    --b[from];
    ++b[to];
  }
  return b;
}

bool balanced(const Multigraph& h, const Orientation& o) {
  auto b = balance(h, o);
  return std::all_of(b.begin(), b.end(), [](long x) { return x == 0; });
}

// Value width that leaves room for a node id and for a sum over every input.
std::uint32_t value_bits(const Network& net) {
  const Graph& g = net.graph();
  int bits = static_cast<int>(net.msg_bits()) - static_cast<int>(net.id_bits()) -
             static_cast<int>(bitwidth(g.n() + 2 * g.m()));
  return static_cast<std::uint32_t>(std::clamp(bits, 1, 30));
}

MinorRoundSpec random_spec(const Graph& g, std::uint32_t bits, std::uint64_t seed) {
  Rng rng(seed, 1);
  MinorRoundSpec sp;
  std::uint64_t vmax = 1ull << bits;
  for (std::size_t e = 0; e < g.m(); ++e) {
    sp.contract.push_back(rng.bernoulli(0.5));
    sp.za.push_back(rng.below(vmax));
    sp.zb.push_back(rng.below(vmax));
  }
  for (NodeId v = 0; v < g.n(); ++v) sp.x.push_back(rng.below(vmax));
  return sp;
}

// Reference written here: union-find over contracted edges.
struct Minor {
  std::vector<NodeId> super;
  explicit Minor(const Graph& g, const std::vector<char>& contract) : super(g.n()) {
    for (NodeId v = 0; v < g.n(); ++v) super[v] = v;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::uint32_t e = 0; e < g.m(); ++e)
        if (contract[e]) {
          auto& a = super[g.edge(e).u];
          auto& b = super[g.edge(e).v];
          if (a != b) a = b = std::min(a, b), changed = true;
        }
    }
  }
};

}  // namespace

TEST_SUITE("eulertools") {
  TEST_CASE("minor round with nothing contracted") {
    Graph g = make_grid(2, 8);
    Network net(g, {}, 1);
    auto sp = random_spec(g, value_bits(net), 1);
    std::fill(sp.contract.begin(), sp.contract.end(), 0);
    sp.consensus = AggOp::Max;
    sp.aggregate = AggOp::Min;
    auto r = minor_round(net, sp);
    for (NodeId v = 0; v < g.n(); ++v) {
      CHECK(r.supernode[v] == v);
      CHECK(r.y[v] == sp.x[v]);
      CHECK(r.has_agg[v]);
      std::uint64_t want = ~0ull;
      for (std::uint32_t e = 0; e < g.m(); ++e) {
        if (g.edge(e).u == v) want = std::min(want, sp.za[e]);
        if (g.edge(e).v == v) want = std::min(want, sp.zb[e]);
      }
      CHECK(r.agg[v] == want);
    }
  }

  TEST_CASE("minor round with everything contracted") {
    Graph g = make_grid(2, 8);
    Network net(g, {}, 2);
    auto sp = random_spec(g, value_bits(net), 2);
    std::fill(sp.contract.begin(), sp.contract.end(), 1);
    sp.consensus = AggOp::Min;
    auto r = minor_round(net, sp);
    auto mn = *std::min_element(sp.x.begin(), sp.x.end());
    for (NodeId v = 0; v < g.n(); ++v) {
      CHECK(r.supernode[v] == 0);
      CHECK(r.y[v] == mn);
      CHECK_FALSE(r.has_agg[v]);
    }
  }

  TEST_CASE("minor round matches centralized evaluation") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      Graph g = seed % 2 ? make_grid(2, 8) : make_erdos_renyi(50, 0.08, seed);
      Network net(g, {}, seed);
      auto sp = random_spec(g, value_bits(net), seed);
      sp.consensus = seed % 3 == 0 ? AggOp::Sum32 : AggOp::Min;
      sp.aggregate = seed % 3 == 1 ? AggOp::Max : AggOp::Sum32;
      auto a = minor_round(net, sp);
      auto b = minor_round_reference(g, sp);
      Minor m(g, sp.contract);
      CHECK(a.supernode == m.super);
      CHECK(a.supernode == b.supernode);
      CHECK(a.y == b.y);
      CHECK(a.has_agg == b.has_agg);
      for (NodeId v = 0; v < g.n(); ++v) {
        if (!b.has_agg[v]) continue;
        std::uint64_t want = 0;
        bool any = false;
        for (std::uint32_t e = 0; e < g.m(); ++e) {
          NodeId u = g.edge(e).u, w = g.edge(e).v;
          if (m.super[u] == m.super[w]) continue;
          for (auto [side, z] : {std::pair{u, sp.za[e]}, std::pair{w, sp.zb[e]}}) {
            if (m.super[side] != m.super[v]) continue;
            want = !any ? z : fold(sp.aggregate, want, z);
            any = true;
          }
        }
        CHECK(a.agg[v] == want);
      }
      CHECK(a.rounds > 0);
    }
    Graph g = make_path(4);
    Network net(g, {}, 1);
    MinorRoundSpec bad;
    CHECK_THROWS_AS(minor_round(net, bad), ConfigError);
  }

  TEST_CASE("forest decomposition") {
    auto tree = Multigraph::from_graph(make_random_tree(100, 2));
    auto f = forest_decomposition(tree, 1);
    CHECK_FALSE(f.violated);
    CHECK(f.max_outdeg <= f.bound);
    CHECK(f.iterations <= log_n(100) + 1);

    auto cyc = Multigraph::from_graph(make_cycle(50));
    auto fc = forest_decomposition(cyc, 1, 2.0);
    CHECK_FALSE(fc.violated);
    CHECK(fc.max_outdeg <= 2);

    // Out-edges of a node get distinct forest labels, so each label class
    // has out-degree at most one: a pseudo-forest.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Graph g = make_erdos_renyi(120, 0.04, seed);
      auto h = Multigraph::from_graph(g);
      auto d = forest_decomposition(h, 3);
      CHECK_FALSE(d.violated);
      std::map<std::pair<NodeId, std::uint32_t>, int> seen;
      for (std::size_t e = 0; e < h.edges.size(); ++e) {
        NodeId tail = d.orientation.forward[e] ? h.edges[e].u : h.edges[e].v;
        CHECK(++seen[{tail, d.forest[e]}] == 1);
        CHECK(d.forest[e] < d.bound);
      }
    }

    auto k12 = Multigraph::from_graph(make_complete(12));
    auto w = forest_decomposition(k12, 1, 2.0);
    CHECK(w.violated);
    CHECK(w.witness_density > 2.0);
    CHECK_THROWS_AS(forest_decomposition(k12, 0), ConfigError);
  }

  TEST_CASE("cycle orientation") {
    Multigraph tri;
    tri.n = 3;
    tri.add(0, 1), tri.add(1, 2), tri.add(2, 0);
    auto t = orient_cycles(tri);
    CHECK(balanced(tri, t.orientation));
    CHECK(t.orientation.eulerian());

    Multigraph two;
    two.n = 10;
    for (NodeId i = 0; i < 4; ++i) two.add(i, (i + 1) % 4);
    for (NodeId i = 0; i < 6; ++i) two.add(4 + i, 4 + (i + 1) % 6);
    CHECK(balanced(two, orient_cycles(two).orientation));

    Multigraph par;
    par.n = 2;
    par.add(0, 1), par.add(1, 0);
    CHECK(balanced(par, orient_cycles(par).orientation));

    Multigraph big;
    big.n = 3000;
    for (NodeId i = 0; i < 3000; ++i) big.add(i, (i + 1) % 3000);
    auto c = orient_cycles(big);
    CHECK(balanced(big, c.orientation));
    for (std::size_t i = 1; i < c.sizes.size(); ++i) CHECK(3 * c.sizes[i] <= 2 * c.sizes[i - 1]);
    CHECK(c.iterations <= 2 * log_n(3000));

    Multigraph star;
    star.n = 4;
    star.add(0, 1), star.add(0, 2), star.add(0, 3);
    CHECK_THROWS_AS(orient_cycles(star), ConfigError);
  }

  TEST_CASE("network decomposition") {
    Graph k = make_complete(20);
    auto d = network_decomposition(k, 2, 1);
    CHECK(d.count() == 1);
    CHECK(d.colors == 1);
    CHECK(verify_decomposition(k, d).ok());

    Graph p = make_path(64);
    auto dp = network_decomposition(p, 2, 1);
    auto cp = verify_decomposition(p, dp);
    CHECK(cp.ok());
    CHECK(cp.max_weak_diameter <= dp.diameter_bound);

    Graph lp = make_path(2048);
    auto dl = network_decomposition(lp, 2, 3);
    auto cl = verify_decomposition(lp, dl);
    CHECK(dl.count() > 1);
    CHECK(cl.ok());
    CHECK(cl.min_same_color_gap > 2);

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Graph g = seed % 2 ? make_erdos_renyi(100, 0.04, seed) : make_grid(2, 10);
      auto nd = network_decomposition(g, 2, seed);
      auto c = verify_decomposition(g, nd);
      CHECK(c.ok());
      CHECK(nd.colors <= nd.chi);
      for (NodeId v = 0; v < g.n(); ++v) CHECK(nd.cluster[v] < nd.count());
    }
  }

  TEST_CASE("eulerian orientation") {
    Graph c = make_cycle(20);
    Network n1(c, {}, 1);
    auto r1 = eulerian_orientation(n1, std::vector<char>(c.m(), 1), {});
    CHECK(balanced(r1.h, r1.orientation));

    Graph k5 = make_complete(5);
    Network n2(k5, {}, 1);
    auto r2 = eulerian_orientation(n2, std::vector<char>(k5.m(), 1), {});
    CHECK(balanced(r2.h, r2.orientation));
    CHECK(r2.h.edges.size() == 10);

    // Two virtual nodes, each wired to four real nodes and to each other.
    Graph g = make_grid(2, 6);
    Network n3(g, {}, 2);
    auto flags = even_subgraph(g, 3);
    VirtualNodeSet vs;
    vs.count = 2;
    vs.real_edges = {{0, 0}, {0, 5}, {0, 7}, {0, 14}, {1, 30}, {1, 35}, {1, 20}, {1, 21}};
    flip_parity(g, flags, {0, 5, 7, 14, 30, 35, 20, 21});
    auto r3 = eulerian_orientation(n3, flags, vs);
    CHECK(r3.h.n == g.n() + 2);
    CHECK(balanced(r3.h, r3.orientation));
    CHECK(r3.even_after_each_class);

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Graph er = make_erdos_renyi(150, 0.05, seed);
      Network net(er, {}, seed);
      auto r = eulerian_orientation(net, even_subgraph(er, seed), {});
      CHECK(balanced(r.h, r.orientation));
      for (auto ok : r.class_forest_ok) CHECK(ok);
    }

    std::ostringstream os;
    r1.orientation.write_edges(os, r1.h);
    auto text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 20);
  }

  TEST_CASE("odd degree is rejected by name") {
    Graph c = make_cycle(8);
    Network net(c, {}, 1);
    std::vector<char> flags(c.m(), 0);
    flags[0] = 1;
    std::string msg;
    try {
      eulerian_orientation(net, flags, {});
    } catch (const ConfigError& e) {
      msg = e.what();
    }
    CHECK(msg.find("node " + std::to_string(c.id(c.edge(0).u)) + " has odd degree") != std::string::npos);
  }

  TEST_CASE("even subgraphs and parity flips") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Graph g = make_erdos_renyi(60, 0.1, seed);
      auto f = even_subgraph(g, seed);
      std::vector<int> deg(g.n(), 0);
      for (std::uint32_t e = 0; e < g.m(); ++e)
        if (f[e]) ++deg[g.edge(e).u], ++deg[g.edge(e).v];
      for (int d : deg) CHECK(d % 2 == 0);
      flip_parity(g, f, {1, 2});
      std::fill(deg.begin(), deg.end(), 0);
      for (std::uint32_t e = 0; e < g.m(); ++e)
        if (f[e]) ++deg[g.edge(e).u], ++deg[g.edge(e).v];
      for (NodeId v = 0; v < g.n(); ++v) CHECK(deg[v] % 2 == (v == 1 || v == 2));
    }
    Graph p = make_path(3);
    std::vector<char> f(p.m(), 0);
    CHECK_THROWS_AS(flip_parity(p, f, {0}), ConfigError);
  }
}
