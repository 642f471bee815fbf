#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "hybrid/distances.hpp"
#include "hybrid/generators.hpp"
#include "hybrid/shortest_paths.hpp"
#include "support.hpp"

using namespace hyb;

namespace {

void check_estimate(const Graph& g, const DistanceEstimate& e) {
  auto fw = ref::floyd(g);
  std::vector<NodeId> scope = e.scope;
  if (scope.empty())
    for (NodeId v = 0; v < g.n(); ++v) scope.push_back(v);
  for (std::size_t i = 0; i < e.sources.size(); ++i)
    for (NodeId v : scope) {
      auto d = fw[e.sources[i]][v];
      CHECK(e.est[i][v] >= d);
      CHECK(double(e.est[i][v]) <= e.stretch * double(d) + 1e-9);
    }
  CHECK(check_stretch(g, e).ok());
}

std::vector<NodeId> sample(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<NodeId> s;
  Rng r(seed);
  while (s.size() < k) {
    NodeId v = static_cast<NodeId>(r.below(n));
    if (std::find(s.begin(), s.end(), v) == s.end()) s.push_back(v);
  }
  return s;
}

}  // namespace

TEST_SUITE("shortestpaths") {
  TEST_CASE("skeleton with x = 1 keeps every node") {
    Graph g = graph_from_text("erdos_renyi:60:0.06,w=30", 2);
    Network net(g, {}, 1);
    auto s = build_skeleton(net, 1);
    CHECK(s.size() == g.n());
    auto c = verify_skeleton(g, s, 50, 1);
    CHECK(c.mismatches == 0);
    CHECK(c.edges_exact);
  }

  TEST_CASE("skeleton on path(200), x = 10") {
    Graph g = make_path(200);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Network net(g, {}, seed);
      auto s = build_skeleton(net, 10);
      CHECK(s.h == std::min<std::uint32_t>(199, static_cast<std::uint32_t>(std::ceil(4 * 10 * std::log(200.0)))));
      auto c = verify_skeleton(g, s, 50, seed);
      CHECK(c.mismatches == 0);
      CHECK(c.unhit == 0);
      CHECK(c.edges_exact);
    }
  }

  TEST_CASE("skeleton hitting property on long pairs") {
    Graph g = graph_from_text("grid:2x30,w=5", 3);
    Network net(g, {}, 4);
    auto s = build_skeleton(net, 4);
    auto c = verify_skeleton(g, s, 100, 9);
    CHECK(c.unhit == 0);
    CHECK(c.mismatches == 0);
  }

  TEST_CASE("spanners") {
    Graph t = make_random_tree(50, 3);
    assign_random_weights(t, 10, 1);
    CHECK(build_spanner(t, 3, 1).size() == t.m());

    Graph k = make_complete(32);
    assign_random_weights(k, 100, 5);
    auto sp = build_spanner(k, 2, 7);
    auto fk = ref::floyd(k), fs = ref::floyd(sp.graph);
    for (NodeId u = 0; u < 32; ++u)
      for (NodeId v = 0; v < 32; ++v) CHECK(fs[u][v] <= 3 * fk[u][v]);

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Graph g = graph_from_text("erdos_renyi:80:0.15,w=40", seed);
      for (std::uint32_t kappa : {1u, 2u, 3u}) {
        auto s = build_spanner(g, kappa, seed);
        auto c = verify_spanner(g, s);
        CHECK(c.subgraph);
        CHECK(c.violations == 0);
        CHECK(double(s.size()) <= Spanner::size_bound(g.n(), kappa));
      }
    }
  }

  TEST_CASE("helper sets for skeleton scheduling") {
    Graph g = make_grid(2, 16);
    Network net(g, {}, 1);
    CHECK(helper_sets_ks(net, {}, 4).helpers.empty());
    std::vector<NodeId> W;
    Rng rng(2);
    for (NodeId v = 0; v < g.n(); ++v)
      if (rng.bernoulli(0.25)) W.push_back(v);
    auto h = helper_sets_ks(net, W, 4);
    CHECK_FALSE(h.precondition_flag);
    CHECK(h.ok(g.n()));
    for (std::size_t i = 0; i < W.size(); ++i) {
      auto d = ref::bfs(g, W[i]);
      CHECK(h.helpers[i].size() >= h.mu);
      for (NodeId u : h.helpers[i]) CHECK(d[u] <= h.mu);
    }
    std::vector<NodeId> all;
    for (NodeId v = 0; v < g.n(); ++v) all.push_back(v);
    CHECK(helper_sets_ks(net, all, 4).precondition_flag);
  }

  TEST_CASE("scheduled programs match solo runs") {
    Graph g = graph_from_text("erdos_renyi:64:0.08,w=20", 5);
    Network net(g, {}, 1);
    auto s = build_skeleton(net, 1, 0.25);
    auto run = [&](std::size_t k) {
      std::vector<std::unique_ptr<BellmanFordProgram>> progs;
      std::vector<NodeProgram*> ptrs;
      for (std::size_t i = 0; i < k; ++i) {
        std::vector<Weight> init(s.size(), kInf);
        init[(i * 17) % s.size()] = 0;
        progs.push_back(std::make_unique<BellmanFordProgram>(init, s.size()));
        ptrs.push_back(progs.back().get());
      }
      auto r = schedule_on_skeleton(net, s, ptrs, net.cap(), s.size() + 2, 3);
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(r.outputs[i] == r.solo[i].outputs);
        auto want = dijkstra(s.graph, static_cast<NodeId>((i * 17) % s.size()));
        CHECK(parse_distances(r.outputs[i]) == want);
      }
      CHECK(r.peak_sends <= net.send_cap());
      CHECK(r.peak_recvs <= net.recv_cap());
      return r;
    };
    run(1);
    auto r4 = run(4);
    CHECK(r4.k == 4);
    CHECK(net.transcript().violations.empty());
  }

  TEST_CASE("sssp") {
    Graph star = make_star(30);
    Network n1(star, {}, 1);
    auto e = sssp(n1, 3, 0.5);
    for (NodeId v = 0; v < star.n(); ++v) CHECK(e.est[0][v] <= 2);
    CHECK(e.est[0][3] == 0);
    check_estimate(star, e);

    Graph c = make_cycle(48);
    assign_random_weights(c, 20, 1);
    Network n2(c, {}, 1);
    check_estimate(c, sssp(n2, 0, 0.25));
    Network n3(c, {}, 1);
    auto o = sssp(n3, 5, 0.25, SsspMode::Oracle);
    CHECK(o.est[0] == dijkstra(c, 5));
    CHECK(parse_sssp_mode("oracle") == SsspMode::Oracle);
    CHECK_THROWS_AS(sssp(n3, 0, 0.0), ConfigError);
  }

  TEST_CASE("k-SSP") {
    Graph g = make_grid(2, 12);
    Network net(g, {}, 2);
    auto r = k_ssp(net, sample(g.n(), 9, 1), 0.25, SourceMode::Random);
    CHECK(r.stretch == doctest::Approx(1.25));
    check_estimate(g, r);

    Graph p = make_path(128);
    assign_random_weights(p, 30, 3);
    Network n2(p, {}, 2);
    auto a = k_ssp(n2, {0, 1, 2, 3, 4, 5, 6, 7}, 0.25, SourceMode::Arbitrary);
    CHECK(a.stretch == doctest::Approx(3.25));
    check_estimate(p, a);

    Network n3(g, {}, 2);
    auto one = k_ssp(n3, {17}, 0.25, SourceMode::Random);
    CHECK(one.est[0] == dijkstra(g, 17));
  }

  TEST_CASE("(k,l)-SP") {
    Graph p = make_path(256);
    Network net(p, {}, 4);
    std::vector<NodeId> S;
    for (NodeId i = 0; i < 32; ++i) S.push_back(i);
    auto r = kl_sp(net, S, {40, 100, 180, 250}, 0.25, 1);
    CHECK(r.nq_k == 6);
    CHECK(r.constraints_ok);
    CHECK(r.mislabeled == 0);
    check_estimate(p, r.estimate);

    Network n1(p, {}, 4);
    auto single = kl_sp(n1, S, {77}, 0.25, 1);
    CHECK(single.estimate.est.size() == 1);
    CHECK(single.mislabeled == 0);

    Graph g = make_grid(2, 16);
    assign_random_weights(g, 50, 3);
    Network n2(g, {}, 5);
    auto r2 = kl_sp(n2, sample(g.n(), 8, 3), sample(g.n(), 8, 4), 0.25, 2);
    CHECK(r2.mislabeled == 0);
    check_estimate(g, r2.estimate);
  }

  TEST_CASE("unweighted APSP") {
    Graph g = make_grid(2, 12);
    Network net(g, {}, 2);
    auto e = apsp_unweighted(net, 0.5);
    CHECK(e.stretch == doctest::Approx(2.75));
    check_estimate(g, e);
    Graph star = make_star(25);
    Network n2(star, {}, 1);
    auto s = apsp_unweighted(n2, 0.3);
    CHECK(s.est == all_pairs(star));
    Graph w = make_path(10);
    assign_random_weights(w, 5, 1);
    Network n3(w, {}, 1);
    CHECK_THROWS_AS(apsp_unweighted(n3, 0.5), ConfigError);
  }

  TEST_CASE("weighted APSP via spanner") {
    Graph g = graph_from_text("erdos_renyi:64:0.1,w=100", 3);
    Network net(g, {}, 3);
    double eps = 1.0 / std::log2(std::log2(64.0));
    auto e = apsp_weighted_spanner(net, eps);
    CHECK(e.stretch == 2 * std::ceil(eps * 6 / 2) - 1);
    check_estimate(g, e);
    Network n2(g, {}, 3);
    CHECK(apsp_weighted_spanner(n2, 0.1).degenerate);
    Graph t = make_random_tree(40, 2);
    assign_random_weights(t, 9, 2);
    Network n3(t, {}, 1);
    CHECK(apsp_weighted_spanner(n3, 1.0).est == all_pairs(t));
  }

  TEST_CASE("weighted APSP via skeleton") {
    Graph g = make_grid(2, 10);
    assign_random_weights(g, 20, 4);
    for (std::uint32_t alpha : {1u, 2u}) {
      Network net(g, {}, alpha);
      auto e = apsp_weighted_skeleton(net, alpha);
      CHECK(e.stretch == 4.0 * alpha - 1);
      check_estimate(g, e);
    }
  }

  TEST_CASE("estimate csv") {
    Graph p = make_path(4);
    Network net(p, {}, 1);
    std::ostringstream os;
    sssp(net, 0, 0.5).to_csv(os, p);
    CHECK(os.str().rfind("source,target,estimate,oracle,ratio\n", 0) == 0);
  }
}
