#include <benchmark/benchmark.h>

#include "hybrid/dissemination.hpp"
#include "hybrid/euler.hpp"
#include "hybrid/generators.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/routing.hpp"
#include "hybrid/shortest_paths.hpp"

namespace {

using namespace hyb;

void BM_NqOracleGrid(benchmark::State& st) {
  Graph g = make_grid(2, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(nq_oracle(g, g.n() / 4).value);
  st.SetComplexityN(static_cast<std::int64_t>(g.n()));
}
BENCHMARK(BM_NqOracleGrid)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_KDisseminateGrid(benchmark::State& st) {
  Graph g = make_grid(2, static_cast<std::size_t>(st.range(0)));
  std::uint64_t rounds = 0;
  for (auto _ : st) {
    Network net(g, {}, 1);
    auto ts = TokenSet::make(net, g.n() / 4, Placement::Uniform, 1);
    rounds = k_disseminate(net, ts).rounds;
  }
  st.counters["rounds"] = static_cast<double>(rounds);
}
BENCHMARK(BM_KDisseminateGrid)->Arg(16)->Arg(32);

void BM_KlRoute(benchmark::State& st) {
  Graph g = make_grid(2, 24);
  std::uint64_t rounds = 0;
  for (auto _ : st) {
    Network net(g, {}, 2);
    auto inst = RoutingInstance::make(net, static_cast<Scenario>(st.range(0)), 16, 16, 2);
    rounds = kl_route(net, inst).rounds;
  }
  st.counters["rounds"] = static_cast<double>(rounds);
}
BENCHMARK(BM_KlRoute)->DenseRange(1, 3);

void BM_Sssp(benchmark::State& st) {
  Graph g = make_erdos_renyi(static_cast<std::size_t>(st.range(0)), 0.05, 3);
  assign_random_weights(g, 100, 3);
  for (auto _ : st) {
    Network net(g, {}, 3);
    benchmark::DoNotOptimize(sssp(net, 0, 0.25).rounds);
  }
}
BENCHMARK(BM_Sssp)->Arg(128)->Arg(256);

void BM_EulerianOrientation(benchmark::State& st) {
  Graph g = make_grid(2, static_cast<std::size_t>(st.range(0)));
  auto flags = even_subgraph(g, 4);
  for (auto _ : st) {
    Network net(g, {}, 4);
    benchmark::DoNotOptimize(eulerian_orientation(net, flags, {}).rounds);
  }
}
BENCHMARK(BM_EulerianOrientation)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
