#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "hybrid/dissemination.hpp"
#include "hybrid/generators.hpp"
#include "support.hpp"

using namespace hyb;

namespace {

bool everyone_knows(const Graph& g, const TokenSet& ts, const DisseminationResult& r) {
  std::vector<Token> want = ts.tokens;
  std::sort(want.begin(), want.end());
  for (NodeId v = 0; v < g.n(); ++v) {
    auto got = r.output(v);
    std::sort(got.begin(), got.end());
    if (got != want) return false;
  }
  return true;
}

std::vector<std::vector<std::uint32_t>> items_at_first(std::size_t members, std::uint32_t m) {
  std::vector<std::vector<std::uint32_t>> held(members);
  for (std::uint32_t i = 0; i < m; ++i) held[0].push_back(i);
  return held;
}

}  // namespace

TEST_SUITE("dissemination") {
  TEST_CASE("load balancing") {
    Graph g = make_path(4);
    Network net(g, {}, 1);
    std::vector<NodeId> members{0, 1, 2, 3};
    auto out = load_balance(net, members, items_at_first(4, 10), 3);
    std::size_t total = 0, mx = 0;
    std::set<std::uint32_t> seen;
    for (const auto& h : out) {
      total += h.size();
      mx = std::max(mx, h.size());
      seen.insert(h.begin(), h.end());
    }
    CHECK(mx == 3);
    CHECK(total == 10);
    CHECK(seen.size() == 10);
    CHECK(net.rounds() == 6);

    for (const auto& h : load_balance(net, members, items_at_first(4, 0), 3)) CHECK(h.empty());
    for (const auto& h : load_balance(net, members, items_at_first(4, 4), 3)) CHECK(h.size() <= 1);
  }

  TEST_CASE("single token") {
    Graph g = make_grid(2, 10);
    Network net(g, {}, 1);
    auto ts = TokenSet::make(net, 1, Placement::OneNode, 1, 0, 37);
    auto r = k_disseminate(net, ts);
    CHECK(everyone_knows(g, ts, r));
    CHECK(r.rounds <= 64 * std::pow(log_n(g.n()), 3));
  }

  TEST_CASE("path(64), 16 tokens at an endpoint") {
    Graph g = make_path(64);
    Network net(g, {}, 1);
    auto ts = TokenSet::make(net, 16, Placement::OneNode, 2, 0, 0);
    auto r = k_disseminate(net, ts);
    CHECK(r.nq == 4);
    CHECK(everyone_knows(g, ts, r));
    CHECK(r.root_complete);
    CHECK(r.max_holding <= r.nq);
    CHECK(net.transcript().violations.empty());
  }

  TEST_CASE("grid(2,16), k = n uniform") {
    Graph g = make_grid(2, 16);
    Network net(g, {}, 1);
    auto ts = TokenSet::make(net, g.n(), Placement::Uniform, 3);
    auto r = k_disseminate(net, ts);
    CHECK(r.nq == ref::nq(g, g.n()));
    CHECK(everyone_knows(g, ts, r));
    CHECK(r.max_holding <= r.nq);
    CHECK(net.transcript().violations.empty());
  }

  TEST_CASE("completeness across graphs, placements and modes") {
    for (auto mode : {IdMode::Hybrid, IdMode::Hybrid0})
      for (const char* s : {"cycle:48", "erdos_renyi:120:0.03", "random_tree:90", "path:2", "path:1"}) {
        Graph g = graph_from_text(s, 7);
        // Two-node HYBRID0 messages have 4 bits, all taken by a 2-bit id and the sequence number.
        if (mode == IdMode::Hybrid0 && g.n() == 2) continue;
        if (mode == IdMode::Hybrid0) assign_random_ids(g, 2, 9);
        ModelConfig cfg;
        cfg.id_mode = mode;
        for (std::uint64_t k : {std::size_t{1}, std::min<std::size_t>(8, g.n()), g.n()})
          for (auto pl : {Placement::OneNode, Placement::Uniform}) {
            Network net(g, cfg, 3);
            auto ts = TokenSet::make(net, k, pl, 5);
            auto r = k_disseminate(net, ts);
            CHECK(everyone_knows(g, ts, r));
            CHECK(r.max_holding <= std::max<std::uint64_t>(r.nq, 1));
            CHECK(net.transcript().violations.empty());
          }
      }
  }

  TEST_CASE("tokens that cannot fit a message are rejected") {
    Graph g = make_path(2);
    Network net(g, {}, 1);
    CHECK_THROWS_AS(TokenSet::make(net, 64, Placement::Uniform, 1), ConfigError);
  }

  TEST_CASE("k-aggregation") {
    Graph c = make_cycle(48);
    Network net(c, {}, 1);
    auto val = [](NodeId v, std::uint32_t i) { return static_cast<std::uint64_t>((v * 7919 + i * 31) % 1000); };
    auto r = k_aggregate(net, 12, val, AggOp::Max);
    for (std::uint32_t i = 0; i < 12; ++i) {
      std::uint64_t m = 0;
      for (NodeId v = 0; v < 48; ++v) m = std::max(m, val(v, i));
      for (NodeId v = 0; v < 48; ++v) CHECK(r.value(v, i)[0] == m);
    }

    Graph g = graph_from_text("grid:2x6", 1);
    Network n2(g, {}, 1);
    auto mn = k_aggregate(n2, 5, [&](NodeId v, std::uint32_t i) { return g.id(v) + i; }, AggOp::Min);
    auto ones = k_aggregate(n2, 5, [](NodeId, std::uint32_t) { return std::uint64_t{1}; }, AggOp::Sum32);
    for (NodeId v = 0; v < g.n(); ++v)
      for (std::uint32_t i = 0; i < 5; ++i) {
        CHECK(mn.value(v, i)[0] == i);
        CHECK(ones.value(v, i)[0] == g.n());
      }
    CHECK(n2.transcript().violations.empty());
  }

  TEST_CASE("dissemination via aggregation") {
    Graph p = make_path(32);
    Network a(p, {}, 2), b(p, {}, 2);
    auto ts = TokenSet::make(a, 8, Placement::Uniform, 4);
    auto direct = k_disseminate(a, ts);
    auto via = disseminate_via_aggregate(b, ts);
    for (NodeId v = 0; v < p.n(); ++v) CHECK(via.result.output(v) == direct.output(v));

    // single holder reserves 0..k-1 in order
    Network c(p, {}, 2);
    auto one = TokenSet::make(c, 6, Placement::OneNode, 4, 0, 5);
    auto r1 = disseminate_via_aggregate(c, one);
    std::vector<std::uint32_t> idx(r1.index);
    std::sort(idx.begin(), idx.end());
    std::vector<std::uint32_t> want(6);
    std::iota(want.begin(), want.end(), 0);
    CHECK(idx == want);

    Graph g = make_cycle(40);
    Network d(g, {}, 3);
    auto spread = TokenSet::make(d, 40, Placement::Uniform, 9);
    auto r2 = disseminate_via_aggregate(d, spread);
    std::set<std::uint32_t> distinct(r2.index.begin(), r2.index.end());
    CHECK(distinct.size() == 40);
    CHECK(*distinct.rbegin() == 39);
    CHECK(everyone_knows(g, spread, r2.result));
  }

  TEST_CASE("token validation") {
    Graph g = make_path(8);
    Network net(g, {}, 1);
    auto ts = TokenSet::make(net, 4, Placement::Uniform, 1);
    ts.tokens[1] = ts.tokens[0];
    CHECK_THROWS_AS(ts.validate(net), ConfigError);
    CHECK_THROWS_AS(parse_placement("everywhere"), ConfigError);
  }

  TEST_CASE("broadcast of multi-word values") {
    Graph g = make_grid(2, 6);
    Network net(g, {}, 1);
    std::vector<NodeId> holder{0, 5, 5, 35};
    std::vector<std::vector<std::uint64_t>> items{{1, 2}, {1ull << 40, 7}, {3, 0}, {9, 1ull << 33}};
    CHECK(broadcast_values(net, holder, items) > 0);
    CHECK(net.transcript().violations.empty());
  }
}
