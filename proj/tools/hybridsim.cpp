// hybridsim: graph generation, NQ queries, experiment sweeps and scaling fits.
#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "hybrid/experiment.hpp"
#include "hybrid/fit.hpp"
#include "hybrid/generators.hpp"
#include "hybrid/graph.hpp"
#include "hybrid/nq.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kIncorrect = 3 };

// "20" -> 1..20, "3..7" -> 3..7, "1,5,9" -> as listed.
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  auto dots = s.find("..");
  try {
    if (dots != std::string::npos) {
      std::uint64_t a = std::stoull(s.substr(0, dots)), b = std::stoull(s.substr(dots + 2));
      if (a > b) throw hyb::ConfigError("");
      for (std::uint64_t i = a; i <= b; ++i) out.push_back(i);
    } else if (s.find(',') != std::string::npos) {
      std::stringstream ss(s);
      std::string part;
      while (std::getline(ss, part, ',')) out.push_back(std::stoull(part));
    } else {
      for (std::uint64_t i = 1, c = std::stoull(s); i <= c; ++i) out.push_back(i);
    }
  } catch (const std::exception&) {
    throw hyb::ConfigError("--seeds: expected N, A..B or a comma list, got '" + s + "'");
  }
  if (out.empty()) throw hyb::ConfigError("--seeds: empty seed list");
  return out;
}

struct Overrides {
  std::string spec_path, graph, algo, k, l, seeds, out, mode, transcript, placement;
  std::vector<std::size_t> sizes;
  double eps = 0;
  std::uint32_t alpha = 0;
  int scenario = 0;
  std::uint64_t budget = 0;

  void attach(CLI::App* c) {
    c->add_option("spec", spec_path, "JSON experiment spec");
    c->add_option("--graph", graph, "generator text, e.g. path:64 or grid:2x{n}");
    c->add_option("--sizes", sizes, "values substituted for {n} in --graph");
    c->add_option("--algo", algo, "algorithm id");
    c->add_option("--k", k, "k as an expression in n, e.g. n/4 or sqrt(n)");
    c->add_option("--l", l, "l as an expression in n");
    c->add_option("--eps", eps, "approximation parameter");
    c->add_option("--alpha", alpha, "APSP skeleton trade-off parameter");
    c->add_option("--scenario", scenario, "routing scenario (1-3) or kl-SP case (1-2)");
    c->add_option("--placement", placement, "token placement: uniform|one");
    c->add_option("--seeds", seeds, "N, A..B or a comma list");
    c->add_option("--budget", budget, "round budget per run (0: none)");
    c->add_option("--out", out, "CSV output path (stdout when empty)");
    c->add_option("--transcript", transcript, "JSON-lines transcript path");
    c->add_option("--mode", mode, "hybrid|hybrid0")->check(CLI::IsMember({"hybrid", "hybrid0"}));
  }

  hyb::ExperimentSpec build() const {
    hyb::ExperimentSpec s = spec_path.empty() ? hyb::ExperimentSpec{} : hyb::ExperimentSpec::load(spec_path);
    if (!graph.empty()) s.graph = graph;
    if (!sizes.empty()) s.sizes = sizes;
    if (!algo.empty()) s.algo = algo;
    if (!k.empty()) s.k = {hyb::SizeExpr(k)};
    if (!l.empty()) s.l = hyb::SizeExpr(l);
    if (eps > 0) s.eps = eps;
    if (alpha > 0) s.alpha = alpha;
    if (scenario > 0) s.scenario = scenario;
    if (!placement.empty()) s.placement = placement;
    if (!seeds.empty()) s.seeds = parse_seeds(seeds);
    if (budget > 0) s.budget = budget;
    if (!mode.empty()) s.mode = hyb::parse_id_mode(mode);
    if (!out.empty()) s.out = out;
    if (!transcript.empty()) s.transcript = transcript;
    s.validate();
    return s;
  }
};

int report(const hyb::ExperimentResult& r) {
  if (r.errors) std::cerr << r.errors << " run(s) failed\n";
  if (r.incorrect) std::cerr << r.incorrect << " run(s) failed the oracle check\n";
  if (r.incorrect) return kIncorrect;
  return r.errors ? kRuntime : kOk;
}

int cmd_run(const Overrides& o) {
  auto spec = o.build();
  std::string out = spec.out;
  spec.out.clear();
  auto r = hyb::run_experiment(spec);
  if (out.empty()) {
    r.write_csv(std::cout);
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write '" + out + "'");
    r.write_csv(os);
  }
  return report(r);
}

// Per (graph, k): seeds, mean and max rounds, fraction correct.
int cmd_bench(const Overrides& o) {
  auto spec = o.build();
  std::string out = spec.out;
  spec.out.clear();
  auto r = hyb::run_experiment(spec);
  struct Acc {
    std::size_t n = 0, runs = 0, ok = 0;
    std::uint32_t nq = 0;
    std::uint64_t sum = 0, max = 0;
  };
  std::map<std::pair<std::string, std::uint64_t>, Acc> acc;
  std::vector<std::pair<std::string, std::uint64_t>> order;
  for (const auto& row : r.rows) {
    auto key = std::make_pair(row.graph, row.k);
    if (!acc.count(key)) order.push_back(key);
    auto& a = acc[key];
    a.n = row.n;
    a.nq = row.nq_k;
    ++a.runs;
    a.ok += row.correct;
    a.sum += row.rounds;
    a.max = std::max(a.max, row.rounds);
  }
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot write '" + out + "'");
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << "graph,n,k,nq_k,seeds,mean_rounds,max_rounds,correct_fraction\n";
  for (const auto& key : order) {
    const auto& a = acc[key];
    os << key.first << ',' << a.n << ',' << key.second << ',' << a.nq << ',' << a.runs << ','
       << static_cast<double>(a.sum) / a.runs << ',' << a.max << ',' << static_cast<double>(a.ok) / a.runs << '\n';
  }
  return report(r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid network simulator"};
  app.require_subcommand(1);

  std::string gen_graph, gen_out;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen", "generate a graph and write it in text form");
  gen->add_option("--graph", gen_graph, "generator text")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output path (stdout when empty)");

  std::string nq_graph, nq_k = "1", nq_out;
  std::uint64_t nq_seed = 1;
  bool nq_dist = false;
  auto* nq = app.add_subcommand("nq", "neighborhood quality of every node");
  nq->add_option("--graph", nq_graph, "generator text")->required();
  nq->add_option("--k", nq_k, "k as an expression in n");
  nq->add_option("--seed", nq_seed, "generator and network seed");
  nq->add_flag("--distributed", nq_dist, "measure in the model instead of by BFS");
  nq->add_option("--out", nq_out, "CSV output path (stdout when empty)");

  Overrides run_o, bench_o;
  auto* run = app.add_subcommand("run", "run an experiment sweep, one CSV row per seed");
  run_o.attach(run);
  auto* bench = app.add_subcommand("bench", "run a sweep and summarise rounds per point");
  bench_o.attach(bench);

  std::string fit_csv, fit_pred = "NQ_k";
  auto* fit = app.add_subcommand("fit", "fit rounds against NQ_k or sqrt(k)");
  fit->add_option("csv", fit_csv, "experiment CSV")->required();
  fit->add_option("--predictor", fit_pred, "NQ_k|sqrt_k");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*gen) {
      hyb::Graph g = hyb::graph_from_text(gen_graph, gen_seed);
      if (gen_out.empty()) {
        hyb::write_graph(std::cout, g);
      } else {
        hyb::save_graph(gen_out, g);
      }
    } else if (*nq) {
      hyb::Graph g = hyb::graph_from_text(nq_graph, nq_seed);
      std::uint64_t k = hyb::SizeExpr(nq_k).eval(g.n());
      auto rep = hyb::nq_graph(g, k, nq_dist ? hyb::NqMode::Distributed : hyb::NqMode::Oracle, {}, nq_seed);
      std::ofstream file;
      if (!nq_out.empty()) file.open(nq_out);
      rep.to_csv(nq_out.empty() ? std::cout : file, g);
      std::cerr << "NQ_" << k << " = " << rep.value << "\n";
    } else if (*run) {
      return cmd_run(run_o);
    } else if (*bench) {
      return cmd_bench(bench_o);
    } else if (*fit) {
      std::ifstream in(fit_csv);
      if (!in) throw hyb::ConfigError("cannot open '" + fit_csv + "'");
      hyb::fit_scaling(in, hyb::parse_predictor(fit_pred)).write_json(std::cout);
    }
  } catch (const hyb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
