#include <doctest.h>

#include <cmath>
#include <set>

#include "hybrid/generators.hpp"
#include "hybrid/routing.hpp"
#include "support.hpp"

using namespace hyb;

TEST_SUITE("routing") {
  TEST_CASE("hash family basics") {
    CHECK(is_prime(2));
    CHECK(is_prime(65537));
    CHECK_FALSE(is_prime(65535));
    CHECK(next_prime(256 * 256) == 65537);
    auto h = sample_hash(4, 100, 7), h2 = sample_hash(4, 100, 7);
    CHECK(h.p >= 100 * 100);
    for (std::uint64_t i = 0; i < 1000; ++i) {
      CHECK(h.eval(i % 100, (i * 7) % 100) == h2.eval(i % 100, (i * 7) % 100));
      CHECK(h.eval(i % 100, i / 10) < 100);
    }
    CHECK(hash_from_coefficients(100, h.coeff).eval(3, 7) == h.eval(3, 7));
  }

  TEST_CASE("kappa = 1 marginal is uniform") {
    const std::uint64_t n = 16, trials = 100000;
    std::vector<double> c(n, 0);
    for (std::uint64_t s = 0; s < trials; ++s) c[sample_hash(1, n, s).eval(3, 7)] += 1;
    double chi = 0, e = double(trials) / n;
    for (double x : c) chi += (x - e) * (x - e) / e;
    CHECK(chi < 30.58);  // chi-square 1% critical value, 15 degrees of freedom
  }

  TEST_CASE("kappa = 2 collision rate") {
    const std::uint64_t n = 16, trials = 20000;
    std::uint64_t col = 0;
    for (std::uint64_t s = 0; s < trials; ++s) {
      auto h = sample_hash(2, n, s);
      col += h.eval(1, 2) == h.eval(5, 9);
    }
    double p = 1.0 / n, sigma = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(double(col) / trials - p) <= 3 * sigma + p * 0.1);
  }

  TEST_CASE("adaptive helpers") {
    Graph g = make_grid(2, 16);
    Network net(g, {}, 1);
    auto empty = adaptive_helpers(net, {}, 64);
    CHECK(empty.helpers.empty());
    CHECK(empty.ok(g.n()));

    const std::uint64_t k = 64;
    const std::uint32_t q = ref::nq(g, k);
    std::vector<NodeId> W;
    Rng rng(3);
    for (NodeId v = 0; v < g.n(); ++v)
      if (rng.bernoulli(double(q) / k)) W.push_back(v);
    Network n2(g, {}, 2);
    auto h = adaptive_helpers(n2, W, k);
    CHECK_FALSE(h.precondition_flag);
    CHECK(h.ok(g.n()));
    std::vector<std::uint32_t> member(g.n(), 0);
    for (std::size_t i = 0; i < W.size(); ++i) {
      CHECK(h.helpers[i].size() >= double(k) / q);
      auto d = ref::bfs(g, W[i]);
      for (NodeId u : h.helpers[i]) {
        CHECK(d[u] <= h.hop_bound(g.n()));
        ++member[u];
      }
    }
    CHECK(*std::max_element(member.begin(), member.end()) <= h.membership_bound(g.n()));
  }

  TEST_CASE("tiny clusters draft everyone") {
    Graph g = make_path(64);
    Network net(g, {}, 1);
    auto cl = cluster_partition(net, 64);
    auto h = adaptive_helpers(net, {0}, 64, cl);
    CHECK(h.join_prob[cl.cluster[0]] == 1.0);
    CHECK(h.helpers[0].size() == cl.members[cl.cluster[0]].size());
    CHECK(h.helpers[0].size() >= 64 / cl.nq);
  }

  TEST_CASE("intermediate map") {
    Graph g = make_path(256);
    Network net(g, {}, 1);
    auto m = intermediate_map(net, 32, 8);
    CHECK_FALSE(m.constraint_flag);
    std::vector<std::pair<Ident, Ident>> pairs;
    for (Ident i = 0; i < 32; ++i)
      for (Ident j = 0; j < 8; ++j) pairs.push_back({i * 7, j * 31});
    auto loads = intermediate_loads(g, m, pairs);
    CHECK(*std::max_element(loads.begin(), loads.end()) <= balls_in_bins_bound(256, 256));
    CHECK(m.node(g, 3, 7) == m.node(g, 3, 7));

    Network one(g, {}, 4);
    auto m1 = intermediate_map(one, 1, 1);
    auto l1 = intermediate_loads(g, m1, {{0, 1}});
    CHECK(*std::max_element(l1.begin(), l1.end()) == 1);
  }

  TEST_CASE("scenario checks") {
    auto c1 = check_scenario(RoutingInstance{Scenario::ArbSrcRandTgt, 64, 9, {}, {}, {}, 1}, 8, 3, 256);
    CHECK_FALSE(c1.ok);
    auto c3 = check_scenario(RoutingInstance{Scenario::RandSrcRandTgt, 16, 16, {}, {}, {}, 1}, 4, 4, 256);
    CHECK(c3.ok);
    CHECK(parse_scenario("1") == Scenario::ArbSrcRandTgt);
    CHECK_THROWS_AS(parse_scenario("4"), ConfigError);
  }

  TEST_CASE("consolidation") {
    Graph g = make_path(1024);
    Network net(g, {}, 1);
    auto inst = RoutingInstance::make(net, Scenario::RandSrcRandTgt, 512, 2, 1);
    auto c = consolidate_sources(net, inst);
    CHECK_FALSE(c.identity);
    CHECK(c.max_k() <= c.bound);
    CHECK(c.max_l() <= c.bound);
    CHECK(c.every_cluster_covered);
    std::multiset<std::size_t> seen;
    for (const auto& o : c.origin) seen.insert(o.begin(), o.end());
    CHECK(seen.size() == inst.demands.size());
    CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == inst.demands.size());

    Network n2(g, {}, 1);
    auto small = RoutingInstance::make(n2, Scenario::RandSrcRandTgt, 8, 8, 1);
    CHECK(consolidate_sources(n2, small).identity);
  }

  TEST_CASE("exact delivery in every scenario") {
    struct Case {
      const char* g;
      Scenario sc;
      std::uint64_t k, l;
    };
    for (Case c : {Case{"path:256", Scenario::ArbSrcRandTgt, 64, 4}, Case{"grid:2x16", Scenario::RandSrcRandTgt, 16, 16},
                   Case{"path:256", Scenario::RandSrcArbTgt, 4, 64}, Case{"path:2", Scenario::ArbSrcRandTgt, 1, 1}})
      for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        Graph g = graph_from_text(c.g, seed);
        Network net(g, {}, seed);
        auto inst = RoutingInstance::make(net, c.sc, c.k, c.l, seed);
        auto r = kl_route(net, inst);
        auto d = check_delivery(g, inst, r);
        CHECK(d.exact());
        CHECK(d.delivered == inst.demands.size());
        CHECK(r.helpers_ok);
        CHECK(r.undeliverable == 0);
        CHECK(net.transcript().violations.empty());
        CHECK(net.transcript().peak_recvs() <= net.recv_cap());
      }
  }

  TEST_CASE("instances from JSON") {
    Graph g = make_path(64);
    Network net(g, {}, 1);
    auto inst = RoutingInstance::from_json(
        net, R"({"scenario": 1, "k": 4, "l": 2, "sources": [0, 1, 2, 3], "targets": "random", "seed": 3})");
    CHECK(inst.sources == std::vector<NodeId>{0, 1, 2, 3});
    CHECK_THROWS_AS(RoutingInstance::from_json(net, "{"), ConfigError);
  }
}
