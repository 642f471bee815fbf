#include "hybrid/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hybrid/dissemination.hpp"
#include "hybrid/distances.hpp"
#include "hybrid/euler.hpp"
#include "hybrid/generators.hpp"
#include "hybrid/hard_instance.hpp"
#include "hybrid/network.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/routing.hpp"
#include "hybrid/shortest_paths.hpp"
#include "json.hpp"

namespace hyb {

namespace {

// Recursive descent over + - * / ^, numbers, n, sqrt(.), log(.).
class ExprParser {
 public:
  ExprParser(const std::string& s, double n) : s_(s), n_(n) {}

  double parse() {
    double v = sum();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return v;
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) return ++i_, true;
    return false;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("bad size expression '" + s_ + "': " + why);
  }
  double sum() {
    double v = product();
    for (;;) {
      if (eat('+')) v += product();
      else if (eat('-')) v -= product();
      else return v;
    }
  }
  double product() {
    double v = power();
    for (;;) {
      if (eat('*')) v *= power();
      else if (eat('/')) {
        double d = power();
        if (d == 0) fail("division by zero");
        v /= d;
      } else return v;
    }
  }
  double power() {
    double b = atom();
    if (eat('^')) return std::pow(b, power());
    return b;
  }
  double atom() {
    skip();
    if (eat('(')) {
      double v = sum();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
      std::size_t used = 0;
      double v = std::stod(s_.substr(i_), &used);
      i_ += used;
      return v;
    }
    std::size_t j = i_;
    while (j < s_.size() && std::isalpha(static_cast<unsigned char>(s_[j]))) ++j;
    std::string word = s_.substr(i_, j - i_);
    i_ = j;
    if (word == "n") return n_;
    if (word == "sqrt" || word == "log") {
      if (!eat('(')) fail("expected '(' after " + word);
      double v = sum();
      if (!eat(')')) fail("missing ')'");
      if (word == "sqrt") return std::sqrt(std::max(0.0, v));
      return v > 1 ? std::log2(v) : 0.0;
    }
    fail(word.empty() ? "expected a value" : "unknown name '" + word + "'");
  }

  const std::string& s_;
  double n_;
  std::size_t i_ = 0;
};

const std::map<std::string, int>& algorithms() {
  static const std::map<std::string, int> a = {
      {"nq", 0},          {"cluster", 0},         {"k_disseminate", 0},  {"via_aggregate", 0},
      {"flood", 0},       {"k_aggregate", 0},     {"route", 0},          {"sssp", 0},
      {"k_ssp_random", 0}, {"k_ssp_arbitrary", 0}, {"kl_sp", 0},          {"apsp_unweighted", 0},
      {"apsp_weighted_spanner", 0}, {"apsp_weighted_skeleton", 0}, {"euler", 0}, {"hard_instance", 0}};
  return a;
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

std::vector<NodeId> sample_nodes(std::size_t n, std::uint64_t k, std::uint64_t seed) {
  k = std::min<std::uint64_t>(k, n);
  std::vector<NodeId> all(n);
  for (NodeId v = 0; v < n; ++v) all[v] = v;
  Rng rng(seed, 0x5eed);
  for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<NodeId> first_nodes(std::size_t n, std::uint64_t k) {
  std::vector<NodeId> s;
  for (NodeId v = 0; v < std::min<std::uint64_t>(k, n); ++v) s.push_back(v);
  return s;
}

// Every node outputs exactly the input token set.
bool tokens_everywhere(const Graph& g, const TokenSet& ts, const DisseminationResult& r) {
  std::vector<Token> want = ts.tokens;
  std::sort(want.begin(), want.end());
  for (NodeId v = 0; v < g.n(); ++v) {
    auto got = r.output(v);
    std::sort(got.begin(), got.end());
    if (got != want) return false;
  }
  return true;
}

void score(ExperimentRow& row, const Graph& g, const DistanceEstimate& e) {
  auto s = check_stretch(g, e);
  row.max_stretch = s.max_ratio;
  row.correct = s.ok();
}

void run_algo(ExperimentRow& row, const ExperimentSpec& spec, Network& net, std::uint64_t seed) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  const std::string& a = spec.algo;
  const std::uint64_t k = row.k, l = row.l;

  if (a == "nq") {
    auto r = nq_distributed(net, k);
    auto o = nq_oracle(g, k);
    row.correct = r.value == o.value && r.per_node == o.per_node;
  } else if (a == "cluster") {
    row.correct = verify_clustering(g, cluster_partition(net, k)).ok();
  } else if (a == "k_disseminate" || a == "via_aggregate" || a == "flood") {
    auto ts = TokenSet::make(net, k, parse_placement(spec.placement), seed);
    DisseminationResult r = a == "k_disseminate"   ? k_disseminate(net, ts)
                            : a == "via_aggregate" ? disseminate_via_aggregate(net, ts).result
                                                   : flood_disseminate(net, ts);
    row.correct = tokens_everywhere(g, ts, r);
  } else if (a == "k_aggregate") {
    auto val = [&](NodeId v, std::uint32_t i) { return splitmix64(seed ^ (std::uint64_t{v} << 32 | i)) & 0xffffu; };
    auto r = k_aggregate(net, k, std::function<std::uint64_t(NodeId, std::uint32_t)>(val), AggOp::Min);
    row.correct = true;
    for (std::uint32_t i = 0; i < k && row.correct; ++i) {
      std::uint64_t m = ~0ull;
      for (NodeId v = 0; v < n; ++v) m = std::min(m, val(v, i));
      for (NodeId v = 0; v < n; ++v)
        if (r.value(v, i)[0] != m) row.correct = false;
    }
  } else if (a == "route") {
    if (spec.scenario < 1 || spec.scenario > 3) throw ConfigError("routing scenario must be 1, 2 or 3");
    auto inst = RoutingInstance::make(net, static_cast<Scenario>(spec.scenario), k, l, seed);
    auto r = kl_route(net, inst);
    row.nq_l = r.scenario.nq_l;
    row.correct = check_delivery(g, inst, r).exact();
  } else if (a == "sssp") {
    score(row, g, sssp(net, static_cast<NodeId>(Rng(seed, 1).below(n)), spec.eps));
  } else if (a == "k_ssp_random") {
    score(row, g, k_ssp(net, sample_nodes(n, k, seed), spec.eps, SourceMode::Random));
  } else if (a == "k_ssp_arbitrary") {
    score(row, g, k_ssp(net, first_nodes(n, k), spec.eps, SourceMode::Arbitrary));
  } else if (a == "kl_sp") {
    auto r = kl_sp(net, sample_nodes(n, k, seed), sample_nodes(n, l, seed + 1), spec.eps, spec.scenario, seed);
    score(row, g, r.estimate);
    row.correct = row.correct && r.mislabeled == 0;
    if (!r.constraints_ok) row.error = "outside parameter range: " + r.reason;
  } else if (a == "apsp_unweighted") {
    score(row, g, apsp_unweighted(net, spec.eps));
  } else if (a == "apsp_weighted_spanner") {
    score(row, g, apsp_weighted_spanner(net, spec.eps));
  } else if (a == "apsp_weighted_skeleton") {
    score(row, g, apsp_weighted_skeleton(net, spec.alpha));
  } else if (a == "euler") {
    auto r = eulerian_orientation(net, even_subgraph(g, seed), {});
    std::vector<std::int64_t> bal(r.h.n, 0);
    for (std::size_t e = 0; e < r.h.edges.size(); ++e) {
      const auto& ed = r.h.edges[e];
      bool fw = r.orientation.forward[e];
      ++bal[fw ? ed.u : ed.v];
      --bal[fw ? ed.v : ed.u];
    }
    row.correct = std::all_of(bal.begin(), bal.end(), [](std::int64_t b) { return b == 0; });
  } else if (a == "hard_instance") {
    auto h = hard_instance(g, k);
    if (h.degenerate) {
      row.error = "degenerate: " + h.reason;
      return;
    }
    auto d = dijkstra(h.graph, h.v);
    Weight near = 0, far = kInf;
    for (NodeId u : h.v1) near = std::max(near, d[u]);
    for (NodeId u : h.v2) far = std::min(far, d[u]);
    row.correct = h.v2.empty() || far >= h.gap * std::max<Weight>(near, 1);
  } else {
    throw ConfigError("unknown algorithm '" + a + "'");
  }
}

std::string replace_n(std::string text, std::size_t n) {
  auto pos = text.find("{n}");
  while (pos != std::string::npos) {
    text.replace(pos, 3, std::to_string(n));
    pos = text.find("{n}", pos);
  }
  return text;
}

}  // namespace

SizeExpr::SizeExpr(std::string text) : text_(std::move(text)) { ExprParser(text_, 16).parse(); }

std::uint64_t SizeExpr::eval(std::size_t n) const {
  double v = ExprParser(text_, static_cast<double>(n)).parse();
  if (!std::isfinite(v)) throw ConfigError("size expression '" + text_ + "' is not finite");
  return static_cast<std::uint64_t>(std::max(1.0, std::round(v)));
}

const std::vector<std::string>& algorithm_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : algorithms()) v.push_back(name);
    return v;
  }();
  return ids;
}

void ExperimentSpec::validate() const {
  if (!algorithms().count(algo)) throw ConfigError("field 'algo': unknown algorithm '" + algo + "'");
  if (seeds.empty()) throw ConfigError("field 'seeds': at least one seed is required");
  if (k.empty()) throw ConfigError("field 'k': at least one value is required");
  if (!(eps > 0)) throw ConfigError("field 'eps': must be positive");
  if (alpha < 1) throw ConfigError("field 'alpha': must be >= 1");
  if (graph.find("{n}") != std::string::npos && sizes.empty())
    throw ConfigError("field 'sizes': graph text uses {n} but no sizes are given");
  try {
    parse_placement(placement);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("field 'placement': ") + e.what());
  }
  std::vector<std::size_t> probe = sizes.empty() ? std::vector<std::size_t>{0} : sizes;
  for (std::size_t n : probe) {
    try {
      parse_graph_spec(replace_n(graph, n));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("field 'graph': ") + e.what());
    }
  }
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    throw ConfigError("spec line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  if (!j.is_object()) throw ConfigError("spec: top level must be an object");
  static const std::vector<std::string> known = {"graph", "sizes", "algo", "k", "l", "eps", "alpha", "scenario",
                                                 "placement", "seeds", "budget", "mode", "out", "transcript"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("field '" + key + "': unknown field");

  ExperimentSpec s;
  std::string cur;
  auto expr = [](const nlohmann::json& v) {
    return SizeExpr(v.is_string() ? v.get<std::string>() : std::to_string(v.get<std::uint64_t>()));
  };
  try {
    if (j.contains(cur = "graph")) s.graph = j[cur].get<std::string>();
    if (j.contains(cur = "sizes")) s.sizes = j[cur].get<std::vector<std::size_t>>();
    if (j.contains(cur = "algo")) s.algo = j[cur].get<std::string>();
    if (j.contains(cur = "k")) {
      s.k.clear();
      if (j[cur].is_array())
        for (const auto& v : j[cur]) s.k.push_back(expr(v));
      else
        s.k.push_back(expr(j[cur]));
    }
    if (j.contains(cur = "l")) s.l = expr(j[cur]);
    if (j.contains(cur = "eps")) s.eps = j[cur].get<double>();
    if (j.contains(cur = "alpha")) s.alpha = j[cur].get<std::uint32_t>();
    if (j.contains(cur = "scenario")) s.scenario = j[cur].get<int>();
    if (j.contains(cur = "placement")) s.placement = j[cur].get<std::string>();
    if (j.contains(cur = "seeds")) {
      if (j[cur].is_number()) {
        s.seeds.clear();
        for (std::uint64_t i = 1; i <= j[cur].get<std::uint64_t>(); ++i) s.seeds.push_back(i);
      } else {
        s.seeds = j[cur].get<std::vector<std::uint64_t>>();
      }
    }
    if (j.contains(cur = "budget")) s.budget = j[cur].get<std::uint64_t>();
    if (j.contains(cur = "mode")) s.mode = parse_id_mode(j[cur].get<std::string>());
    if (j.contains(cur = "out")) s.out = j[cur].get<std::string>();
    if (j.contains(cur = "transcript")) s.transcript = j[cur].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("field '" + cur + "': wrong type");
  } catch (const ConfigError& e) {
    throw ConfigError("field '" + cur + "': " + e.what());
  }
  s.validate();
  return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentResult::csv_header() {
  return "graph,n,m,diameter,algo,seed,k,l,eps,alpha,nq_k,nq_l,rounds,global_msgs,global_bits,violations,correct,"
         "max_stretch,error";
}

std::string ExperimentResult::csv_row(const ExperimentRow& r) {
  std::ostringstream os;
  os << csv_field(r.graph) << ',' << r.n << ',' << r.m << ',' << r.diameter << ',' << r.algo << ',' << r.seed << ','
     << r.k << ',' << r.l << ',' << fmt_double(r.eps) << ',' << r.alpha << ',' << r.nq_k << ',' << r.nq_l << ','
     << r.rounds << ',' << r.global_msgs << ',' << r.global_bits << ',' << r.violations << ',' << (r.correct ? 1 : 0)
     << ',' << (r.max_stretch ? fmt_double(*r.max_stretch) : "") << ',' << csv_field(r.error);
  return os.str();
}

void ExperimentResult::write_csv(std::ostream& os) const {
  os << csv_header() << '\n';
  for (const auto& r : rows) os << csv_row(r) << '\n';
}

ExperimentRow run_point(const ExperimentSpec& spec, const Graph& g, const std::string& graph_text,
                        const SizeExpr& kexpr, std::uint64_t seed) {
  ExperimentRow row;
  row.graph = graph_text;
  row.n = g.n();
  row.m = g.m();
  row.algo = spec.algo;
  row.seed = seed;
  row.eps = spec.eps;
  row.alpha = spec.alpha;
  try {
    row.diameter = hop_diameter(g);
    row.k = kexpr.eval(g.n());
    row.l = spec.l.eval(g.n());
    row.nq_k = nq_oracle(g, row.k).value;
    row.nq_l = nq_oracle(g, row.l).value;
    ModelConfig cfg;
    cfg.id_mode = spec.mode;
    Network net(g, cfg, seed);
    if (spec.budget) net.set_budget(spec.budget);
    try {
      run_algo(row, spec, net, seed);
    } catch (...) {
      row.rounds = net.rounds();
      throw;
    }
    const Transcript& t = net.transcript();
    row.rounds = t.rounds;
    row.global_msgs = t.global_msgs;
    row.global_bits = t.global_bits;
    row.violations = t.violations.size();
    if (row.violations) row.correct = false;
    if (!spec.transcript.empty()) row.transcript_json = t.to_json();
  } catch (const std::exception& e) {
    row.correct = false;
    row.error = e.what();
  }
  return row;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult res;
  std::vector<std::size_t> sizes = spec.sizes.empty() ? std::vector<std::size_t>{0} : spec.sizes;
  for (std::size_t sz : sizes) {
    std::string text = replace_n(spec.graph, sz);
    GraphSpec gs = parse_graph_spec(text);
    for (const auto& k : spec.k)
      for (std::uint64_t seed : spec.seeds) {
        ExperimentRow row;
        try {
          Graph g = generate(gs, seed);
          if (spec.mode == IdMode::Hybrid0) assign_random_ids(g, ModelConfig{}.id_exponent, seed);
          row = run_point(spec, g, text, k, seed);
        } catch (const std::exception& e) {
          row.graph = text;
          row.algo = spec.algo;
          row.seed = seed;
          row.error = e.what();
        }
        if (!row.error.empty() && row.error.rfind("outside parameter range", 0) != 0 &&
            row.error.rfind("degenerate", 0) != 0)
          ++res.errors;
        else if (!row.correct && row.error.empty())
          ++res.incorrect;
        res.rows.push_back(std::move(row));
      }
  }
  if (!spec.out.empty()) {
    std::ofstream os(spec.out);
    if (!os) throw std::runtime_error("cannot write '" + spec.out + "'");
    res.write_csv(os);
  }
  if (!spec.transcript.empty()) {
    std::ofstream os(spec.transcript);
    if (!os) throw std::runtime_error("cannot write '" + spec.transcript + "'");
    for (const auto& r : res.rows)
      if (!r.transcript_json.empty()) os << r.transcript_json << '\n';
  }
  return res;
}

}  // namespace hyb
