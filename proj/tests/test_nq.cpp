#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "hybrid/distances.hpp"
#include "hybrid/generators.hpp"
#include "hybrid/nq.hpp"
#include "support.hpp"

using namespace hyb;

TEST_SUITE("nq") {
  TEST_CASE("k = 1 gives 1") {
    for (const char* s : {"path:10", "grid:2x5", "cycle:9"}) {
      Graph g = graph_from_text(s, 1);
      for (NodeId v = 0; v < g.n(); ++v) CHECK(nq_node(g, 1, v) == 1);
    }
  }

  TEST_CASE("closed values on paths and cycles") {
    Graph p = make_path(100);
    CHECK(nq_node(p, 20, 0) == 4);
    for (NodeId v = 10; v < 90; ++v) CHECK(nq_node(p, 20, v) <= 3);
    CHECK(nq_oracle(p, 20).value == 4);
    CHECK(nq_oracle(make_path(5), 100).value == 4);
    CHECK(nq_oracle(make_cycle(64), 36).value == 4);
    CHECK(nq_oracle(make_path(64), 64).value == 8);
    CHECK(nq_oracle(make_path(256), 32).value == 6);
    CHECK(nq_oracle(make_path(64), 16).value == 4);
  }

  TEST_CASE("oracle matches brute force") {
    for (const char* s : {"path:40", "cycle:33", "grid:2x7", "random_tree:45", "erdos_renyi:50:0.06"}) {
      Graph g = graph_from_text(s, 2);
      for (std::uint64_t k : {1ull, 3ull, 10ull, 45ull, 200ull}) CHECK(nq_oracle(g, k).value == ref::nq(g, k));
    }
  }

  TEST_CASE("distributed equals oracle") {
    for (auto mode : {IdMode::Hybrid, IdMode::Hybrid0})
      for (const char* s : {"grid:2x8", "path:50", "erdos_renyi:60:0.05"}) {
        Graph g = graph_from_text(s, 4);
        if (mode == IdMode::Hybrid0) assign_random_ids(g, 2, 4);
        ModelConfig cfg;
        cfg.id_mode = mode;
        for (std::uint64_t k : {1ull, 16ull, 60ull}) {
          Network net(g, cfg, 3);
          auto d = nq_distributed(net, k);
          auto o = nq_oracle(g, k);
          CHECK(d.per_node == o.per_node);
          CHECK(d.value == o.value);
          CHECK(d.rounds > 0);
          CHECK(net.transcript().violations.empty());
        }
      }
  }

  TEST_CASE("bounds and growth") {
    for (const char* s : {"path:64", "cycle:50", "grid:2x9", "random_tree:70", "erdos_renyi:80:0.04"}) {
      Graph g = graph_from_text(s, 5);
      const double n = g.n(), D = hop_diameter(g);
      for (std::uint64_t k = 1; k <= g.n(); k = k * 2 + 1) {
        auto q = nq_oracle(g, k).value;
        CHECK(q >= 1);
        CHECK(q <= std::min<double>(D, std::ceil(std::sqrt(double(k)))));
        CHECK(q > std::sqrt(D * k / (3 * n)));
        for (double a : {2.0, 4.0, 9.0})
          CHECK(nq_oracle(g, static_cast<std::uint64_t>(a * k)).value <= 6 * std::sqrt(a) * q);
      }
    }
  }

  TEST_CASE("a sparse node exists below NQ") {
    Graph g = graph_from_text("grid:2x10", 1);
    const std::uint64_t k = 50;
    auto rep = nq_oracle(g, k);
    auto d = ref::bfs(g, rep.argmax);
    for (std::uint32_t r = 1; r < rep.value; ++r) {
      std::size_t b = std::count_if(d.begin(), d.end(), [&](std::uint32_t x) { return x <= r; });
      CHECK(r * b < k);
    }
  }

  TEST_CASE("grid NQ tracks k^(1/3)") {
    Graph g = make_grid(2, 16);
    for (std::uint64_t k = 8; k <= 4096; k *= 2) {
      double ratio = nq_oracle(g, k).value / std::cbrt(double(k));
      CHECK(ratio >= 0.3);
      CHECK(ratio <= 3.0);
    }
  }

  TEST_CASE("ruling sets") {
    Graph p = make_path(100);
    auto all = ruling_set(p, 1);
    CHECK(all.members.size() == 100);
    auto rs = ruling_set(p, 9);
    auto c = verify_ruling_set(p, rs);
    CHECK(c.spacing);
    CHECK(c.domination);
    for (std::size_t i = 1; i < rs.members.size(); ++i) CHECK(rs.members[i] - rs.members[i - 1] >= 9);
    CHECK(c.max_distance <= 9 * ceil_log2(100));
    CHECK(ruling_set(p, 9).members == rs.members);

    Graph g = graph_from_text("erdos_renyi:90:0.05", 8);
    Network net(g, {}, 1);
    std::vector<std::uint64_t> keys(g.ids().begin(), g.ids().end());
    auto b = ruling_set_bitwise(net, 3, keys, bitwidth(g.n()));
    auto cb = verify_ruling_set(g, b);
    CHECK(cb.spacing);
    CHECK(cb.domination);
  }

  TEST_CASE("clustering on path(64), k = n") {
    Graph p = make_path(64);
    auto c = cluster_partition(p, 64);
    CHECK(c.nq == 8);
    auto chk = verify_clustering(p, c);
    CHECK(chk.ok());
    CHECK(chk.min_size >= 8);
    CHECK(chk.max_size <= 16);
  }

  TEST_CASE("in-model clustering contract") {
    for (auto mode : {IdMode::Hybrid, IdMode::Hybrid0})
      for (const char* s : {"grid:2x12", "path:90", "erdos_renyi:100:0.04", "random_tree:80"}) {
        Graph g = graph_from_text(s, 6);
        if (mode == IdMode::Hybrid0) assign_random_ids(g, 2, 6);
        ModelConfig cfg;
        cfg.id_mode = mode;
        for (std::uint64_t k : {4ull, 20ull, static_cast<unsigned long long>(g.n())}) {
          Network net(g, cfg, 2);
          auto c = cluster_partition(net, k);
          auto chk = verify_clustering(g, c);
          CHECK(chk.ok());
          CHECK(c.count() <= g.n() * c.nq / k);
          const double bound = 4.0 * c.nq * ceil_log2(g.n());
          for (NodeId v = 0; v < g.n(); ++v) CHECK(ref::bfs(g, c.leader_of(v))[v] <= bound);
          std::set<NodeId> leaders(c.leader.begin(), c.leader.end());
          CHECK(leaders.size() == c.count());
        }
      }
  }

  TEST_CASE("csv export") {
    Graph p = make_path(5);
    std::ostringstream os;
    nq_oracle(p, 4).to_csv(os, p);
    CHECK(os.str().rfind("node,", 0) == 0);
  }
}
