#include "hybrid/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "hybrid/distances.hpp"

namespace hyb {

namespace {

std::uint32_t skeleton_hops(std::size_t n, double x, double xi) {
  double h = std::ceil(xi * x * std::log(static_cast<double>(std::max<std::size_t>(n, 2))));
  double cap = static_cast<double>(n > 1 ? n - 1 : 1);
  return static_cast<std::uint32_t>(std::clamp(h, 1.0, cap));
}

// Sends every envelope in as few rounds as greedy packing under the caps allows.
std::uint64_t pack_rounds(Network& net, std::vector<Envelope> msgs, std::uint32_t* peak_s,
                          std::uint32_t* peak_r) {
  const std::size_t n = net.n();
  std::vector<std::uint32_t> s(n, 0), r(n, 0);
  for (const auto& e : msgs) {
    *peak_s = std::max(*peak_s, ++s[e.from]);
    *peak_r = std::max(*peak_r, ++r[e.to]);
  }
  std::uint64_t start = net.rounds();
  while (!msgs.empty()) {
    std::fill(s.begin(), s.end(), 0);
    std::fill(r.begin(), r.end(), 0);
    std::vector<Envelope> now, later;
    for (auto& e : msgs) {
      if (s[e.from] < net.send_cap() && r[e.to] < net.recv_cap()) {
        ++s[e.from];
        ++r[e.to];
        now.push_back(e);
      } else {
        later.push_back(e);
      }
    }
    net.round(std::move(now));
    msgs.swap(later);
  }
  return net.rounds() - start;
}

}  // namespace

std::vector<std::vector<Weight>> hop_limited_rows(const Graph& g, const std::vector<NodeId>& from,
                                                  std::uint32_t h) {
  std::vector<std::vector<Weight>> rows;
  rows.reserve(from.size());
  bool exact = g.n() <= 1 || h >= g.n() - 1;
  for (NodeId v : from) rows.push_back(exact ? dijkstra(g, v) : hop_limited(g, v, h));
  return rows;
}

SkeletonGraph skeleton_over(Network& net, std::vector<NodeId> nodes, double x, double xi) {
  const Graph& g = net.graph();
  if (nodes.empty()) throw ConfigError("empty skeleton");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  SkeletonGraph s;
  s.x = x;
  s.xi = xi;
  s.h = skeleton_hops(g.n(), x, xi);
  s.nodes = std::move(nodes);
  s.index.assign(g.n(), kNone32);
  for (std::uint32_t i = 0; i < s.nodes.size(); ++i) s.index[s.nodes[i]] = i;
  s.dh = hop_limited_rows(g, s.nodes, s.h);
  s.graph = Graph(s.nodes.size());
  std::vector<Ident> ids;
  for (NodeId v : s.nodes) ids.push_back(g.id(v));
  s.graph.set_ids(std::move(ids));
  for (std::uint32_t a = 0; a < s.nodes.size(); ++a)
    for (std::uint32_t b = a + 1; b < s.nodes.size(); ++b)
      if (s.dh[a][s.nodes[b]] < kInf) s.graph.add_edge(a, b, s.dh[a][s.nodes[b]]);
  std::uint64_t start = net.rounds();
  for (NodeId v : s.nodes) net.learn_ball(v, s.h);
  net.local_rounds(s.h);
  s.rounds = net.rounds() - start;
  return s;
}

SkeletonGraph build_skeleton(Network& net, double x, double xi) {
  const std::size_t n = net.n();
  if (!(x >= 1.0) || x > static_cast<double>(n)) throw ConfigError("skeleton needs 1 <= x <= n");
  std::vector<NodeId> nodes;
  std::uint32_t tries = 0;
  while (nodes.empty()) {
    if (tries == 64) throw ConfigError("skeleton stayed empty after 64 samples");
    for (NodeId v = 0; v < n; ++v)
      if (net.rng(v).bernoulli(1.0 / x)) nodes.push_back(v);
    ++tries;
  }
  SkeletonGraph s = skeleton_over(net, std::move(nodes), x, xi);
  s.resamples = tries - 1;
  return s;
}

SkeletonCheck verify_skeleton(const Graph& g, const SkeletonGraph& s, std::size_t pairs, std::uint64_t seed) {
  SkeletonCheck c;
  const std::size_t ns = s.size();
  auto dh = hop_limited_rows(g, s.nodes, s.h);
  for (std::uint32_t a = 0; a < ns && c.edges_exact; ++a)
    for (std::uint32_t b = 0; b < ns; ++b) {
      if (a == b) continue;
      Weight want = dh[a][s.nodes[b]];
      bool has = s.graph.has_edge(a, b);
      if (has != (want < kInf)) {
        c.edges_exact = false;
        break;
      }
    }
  for (const auto& e : s.graph.edges())
    if (e.w != dh[e.u][s.nodes[e.v]]) c.edges_exact = false;

  Rng rng(seed, 0x5c1);
  for (std::size_t i = 0; i < pairs && ns > 1; ++i) {
    std::uint32_t a = static_cast<std::uint32_t>(rng.below(ns));
    std::uint32_t b = static_cast<std::uint32_t>(rng.below(ns));
    Weight ds = dijkstra(s.graph, a)[b];
    Weight dg = dijkstra(g, s.nodes[a])[s.nodes[b]];
    ++c.pairs;
    if (ds != dg) ++c.mismatches;
  }

  // Shortest paths with the fewest hops among equal weights.
  for (std::size_t i = 0; i < pairs && g.n() > 1; ++i) {
    NodeId a = static_cast<NodeId>(rng.below(g.n()));
    NodeId b = static_cast<NodeId>(rng.below(g.n()));
    std::vector<std::pair<Weight, std::uint32_t>> d(g.n(), {kInf, kUnreached});
    std::vector<NodeId> par(g.n(), kNoNode);
    using Item = std::tuple<Weight, std::uint32_t, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[a] = {0, 0};
    pq.push({0, 0, a});
    while (!pq.empty()) {
      auto [dw, dhp, v] = pq.top();
      pq.pop();
      if (std::pair(dw, dhp) != d[v]) continue;
      for (const auto& arc : g.adj(v)) {
        std::pair<Weight, std::uint32_t> nd{dw + arc.w, dhp + 1};
        if (nd < d[arc.to]) {
          d[arc.to] = nd;
          par[arc.to] = v;
          pq.push({nd.first, nd.second, arc.to});
        }
      }
    }
    if (d[b].first >= kInf) continue;
    std::vector<NodeId> path;
    for (NodeId v = b; v != kNoNode; v = par[v]) path.push_back(v);
    if (path.size() < s.h) continue;
    std::size_t run = 0;
    bool hit = true;
    for (NodeId v : path) {
      run = s.contains(v) ? 0 : run + 1;
      if (run >= s.h) hit = false;
    }
    if (!hit) ++c.unhit;
  }
  return c;
}

KSHelperSets helper_sets_ks(Network& net, const std::vector<NodeId>& W, double x, double c) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (!(x >= 1.0)) throw ConfigError("helper sets need x >= 1");
  KSHelperSets r;
  r.x = x;
  r.mu = static_cast<std::uint32_t>(std::min<double>(std::ceil(x), static_cast<double>(n)));
  r.W = W;
  r.membership.assign(n, 0);
  std::uint64_t start = net.rounds();
  double expect = static_cast<double>(n) / x;
  r.precondition_flag = static_cast<double>(W.size()) > expect + 3.0 * std::sqrt(expect) + 1.0;
  double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  net.local_rounds(r.mu);
  for (NodeId w : W) {
    auto b = ball(g, w, r.mu);
    std::vector<NodeId> h;
    if (b.size() <= r.mu) {
      h = b;
    } else {
      double q = std::min(1.0, 8.0 * c * ln * r.mu / static_cast<double>(b.size()));
      for (NodeId u : b)
        if (net.rng(u).bernoulli(q)) h.push_back(u);
    }
    auto hops = bfs_hops(g, w, r.mu);
    for (NodeId u : h) {
      ++r.membership[u];
      r.max_hop = std::max(r.max_hop, hops[u]);
    }
    r.helpers.push_back(std::move(h));
  }
  net.local_rounds(r.mu);
  r.min_size = W.empty() ? 0 : r.helpers.front().size();
  for (const auto& h : r.helpers) r.min_size = std::min(r.min_size, h.size());
  for (auto m : r.membership) r.max_membership = std::max(r.max_membership, m);
  r.rounds = net.rounds() - start;
  return r;
}

ScheduleResult schedule_on_skeleton(Network& net, const SkeletonGraph& s,
                                    const std::vector<NodeProgram*>& programs, double gamma,
                                    std::uint64_t budget, std::uint64_t seed) {
  if (!(gamma > 0)) throw ConfigError("gamma must be positive");
  ScheduleResult r;
  r.k = programs.size();
  if (programs.empty()) return r;
  std::uint64_t start = net.rounds();

  // Programs run with the caps of the host network and ids narrow enough to
  // travel through it unchanged.
  ModelConfig cfg = net.config();
  std::uint32_t narrow = log_n(s.size());
  std::uint32_t slack = 3 * (net.id_bits() - std::min(net.id_bits(), narrow));
  cfg.msg_bits = net.msg_bits() > slack ? net.msg_bits() - slack : 1;
  if (cfg.id_mode == IdMode::Hybrid0) cfg.id_exponent = net.id_bits() / std::max(narrow, 1u) + 1;

  std::vector<std::vector<std::vector<Envelope>>> logs(r.k);
  for (std::size_t i = 0; i < r.k; ++i) {
    r.solo.push_back(execute(s.graph, cfg, *programs[i], budget, seed, &logs[i]));
    r.outputs.push_back(r.solo.back().outputs);
    r.sim_rounds = std::max(r.sim_rounds, r.solo.back().rounds);
  }

  double x = std::max(1.0, std::sqrt(static_cast<double>(r.k) / gamma));
  r.helpers = helper_sets_ks(net, s.nodes, x);
  std::size_t smallest = r.helpers.min_size;
  for (auto& h : r.helpers.helpers)
    if (h.empty()) throw ConfigError("helper shortage on the skeleton");
  r.jobs = static_cast<std::uint32_t>(ceil_div(r.k, std::max<std::size_t>(smallest, 1)));
  r.pair_hops = s.h + 2 * r.helpers.mu;

  auto at = [&](std::size_t i, NodeId sk) { return r.helpers.helpers[sk][i / r.jobs]; };
  net.local_rounds(r.helpers.mu);  // inputs to helpers
  for (std::uint64_t round = 0; round < r.sim_rounds; ++round) {
    net.local_rounds(r.pair_hops);
    std::vector<Envelope> msgs;
    for (std::size_t i = 0; i < r.k; ++i) {
      if (round >= logs[i].size()) continue;
      for (const auto& e : logs[i][round]) msgs.push_back({at(i, e.from), at(i, e.to), e.msg});
    }
    if (!msgs.empty()) pack_rounds(net, std::move(msgs), &r.peak_sends, &r.peak_recvs);
  }
  net.local_rounds(r.helpers.mu);  // outputs back to owners
  r.rounds = net.rounds() - start;
  return r;
}

BellmanFordProgram::BellmanFordProgram(std::vector<Weight> init, std::uint64_t rounds)
    : init_(std::move(init)), rounds_(std::max<std::uint64_t>(rounds, 1)) {}

void BellmanFordProgram::init(NodeContext& ctx) {
  if (ctx.index() == 0) {
    dist_.assign(ctx.graph().n(), kInf);
    dirty_.assign(ctx.graph().n(), 0);
  }
  dist_[ctx.index()] = init_.size() > ctx.index() ? init_[ctx.index()] : kInf;
  dirty_[ctx.index()] = dist_[ctx.index()] < kInf;
}

void BellmanFordProgram::on_round(NodeContext& ctx, std::span<const LocalEnvelope> local,
                                  std::span<const Envelope>) {
  NodeId v = ctx.index();
  for (const auto& e : local) {
    Weight w = kInf;
    for (const auto& a : ctx.neighbors())
      if (a.to == e.from) w = std::min(w, a.w);
    Weight cand = e.msg.data[0] + w;
    if (cand < dist_[v]) {
      dist_[v] = cand;
      dirty_[v] = 1;
    }
  }
  if (ctx.round() >= rounds_) {
    ctx.output(dist_[v] < kInf ? std::to_string(dist_[v]) : "inf");
    ctx.halt();
    return;
  }
  if (dirty_[v]) {
    dirty_[v] = 0;
    for (const auto& a : ctx.neighbors()) {
      LocalMessage m;
      m.data.push_back(dist_[v]);
      ctx.send_local(a.to, std::move(m));
    }
  }
}

std::vector<Weight> parse_distances(const std::vector<std::string>& out) {
  std::vector<Weight> d;
  d.reserve(out.size());
  for (const auto& s : out) d.push_back(s == "inf" || s.empty() ? kInf : std::stoull(s));
  return d;
}

}  // namespace hyb
