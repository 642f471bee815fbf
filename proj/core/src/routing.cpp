#include "hybrid/routing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "hybrid/dissemination.hpp"
#include "hybrid/distances.hpp"

namespace hyb {

namespace {

enum : std::uint32_t { kFwd = 50, kReq = 51, kRep = 52 };

double ln_n(std::size_t n) { return std::log(static_cast<double>(std::max<std::size_t>(n, 2))); }

enum class StepKind { Local, Forward, Request, Reply };

// One step of a routing run as seen from the messages it carries; replayed
// backwards to send answers along the paths of logging messages.
struct Step {
  StepKind kind = StepKind::Local;
  std::uint64_t local = 0;
  std::vector<PortedEnvelope> env;
  std::vector<std::int64_t> carried;  // original demand index per envelope, -1 for none
  std::uint32_t sp = 1, rp = 1;
};
using Log = std::vector<Step>;

struct Arrival {
  std::size_t orig;
  NodeId at;
  Ident s;
  std::uint64_t payload;
};

struct Ctx {
  Network& net;
  const VirtualTree& tree;
  const IntermediateMap& map;
  RoutingResult& res;
  std::uint32_t window;
  std::map<std::uint64_t, std::pair<NqReport, Clustering>> cache;

  const Clustering& clusters(std::uint64_t k) {
    auto it = cache.find(k);
    if (it == cache.end()) {
      auto nq = nq_distributed(net, k, &tree);
      auto cl = cluster_partition(net, k, &nq, &tree);
      it = cache.emplace(k, std::make_pair(std::move(nq), std::move(cl))).first;
    }
    return it->second.second;
  }
};

void charge_local(Network& net, std::uint64_t t, Log* log) {
  net.local_rounds(t);
  if (log) log->push_back(Step{StepKind::Local, t, {}, {}, 1, 1});
}

Delivery logged_exchange(Network& net, StepKind kind, std::vector<PortedEnvelope> env,
                         std::vector<std::int64_t> carried, std::uint32_t sp, std::uint32_t rp, Log* log) {
  if (log) log->push_back(Step{kind, 0, env, std::move(carried), sp, rp});
  return net.exchange(std::move(env), sp, rp);
}

std::uint64_t max_over_nodes(Network& net, const VirtualTree& tree, const std::vector<std::uint64_t>& x) {
  return tree_aggregate_broadcast(net, tree, x, AggOp::Max)[tree.root()];
}

std::uint32_t next_port(std::vector<std::uint32_t>& cnt, NodeId v, std::uint32_t window) {
  if (cnt[v] >= window)
    throw CapViolation("node " + std::to_string(v) + " addressed by more than " + std::to_string(window) +
                       " messages in one routing round");
  return cnt[v]++;
}

HelperAssignment own_helpers(const std::vector<NodeId>& W, std::size_t n) {
  HelperAssignment h;
  h.W = W;
  h.membership.assign(n, 0);
  for (NodeId w : W) {
    h.helpers.push_back({w});
    h.membership[w]++;
  }
  return h;
}

// Sends every demand from its source helpers through the intermediate node
// h(s, t) to the helpers of its target and on to the target itself.
void route_core(Ctx& cx, const std::vector<Demand>& dem, const std::vector<std::size_t>& orig,
                const std::vector<NodeId>& S, const std::vector<NodeId>& T, bool source_helpers, bool announce,
                Log* log, std::vector<Arrival>& out) {
  Network& net = cx.net;
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (dem.empty()) return;
  const std::uint64_t kp = std::max<std::uint64_t>(std::max(S.size(), T.size()), 1);
  const Clustering& cl = cx.clusters(kp);
  const std::uint64_t hop = 2ull * std::max<std::uint32_t>(cl.radius, 1);

  net.begin_phase("routing-helpers");
  HelperAssignment ht = adaptive_helpers(net, T, kp, cl);
  HelperAssignment hs = source_helpers ? adaptive_helpers(net, S, kp, cl) : own_helpers(S, n);
  for (const HelperAssignment* h : {&ht, &hs}) {
    if (h->W.empty()) continue;
    cx.res.max_membership = std::max(cx.res.max_membership, h->max_membership);
    if (h != &hs || source_helpers) cx.res.helpers_ok = cx.res.helpers_ok && h->ok(n);
  }
  auto helpers_of = [&](const HelperAssignment& h, NodeId w) -> std::vector<NodeId> {
    auto it = std::lower_bound(h.W.begin(), h.W.end(), w);
    const auto& hw = h.helpers[it - h.W.begin()];
    if (hw.empty()) return {w};
    return hw;
  };

  // Each source hands its messages round robin to its helpers.
  std::vector<std::vector<std::size_t>> by_src(n), by_tgt(n);
  for (std::size_t d = 0; d < dem.size(); ++d) {
    by_src[dem[d].s].push_back(d);
    by_tgt[dem[d].t].push_back(d);
  }
  std::vector<std::vector<std::size_t>> queue(n);
  for (NodeId s : S) {
    auto& ds = by_src[s];
    std::sort(ds.begin(), ds.end(), [&](auto a, auto b) { return g.id(dem[a].t) < g.id(dem[b].t); });
    auto hsw = helpers_of(hs, s);
    for (std::size_t i = 0; i < ds.size(); ++i) queue[hsw[i % hsw.size()]].push_back(ds[i]);
  }
  if (source_helpers) charge_local(net, hop, log);

  net.begin_phase("routing-forward");
  std::vector<std::uint64_t> qlen(n);
  for (NodeId v = 0; v < n; ++v) qlen[v] = queue[v].size();
  const std::uint64_t rounds1 = max_over_nodes(net, cx.tree, qlen);
  std::vector<std::map<std::pair<Ident, Ident>, std::uint64_t>> store(n);
  std::vector<std::uint32_t> cnt(n);
  for (std::uint64_t r = 0; r < rounds1; ++r) {
    std::fill(cnt.begin(), cnt.end(), 0);
    std::vector<PortedEnvelope> env;
    std::vector<std::int64_t> carried;
    for (NodeId u = 0; u < n; ++u) {
      if (queue[u].size() <= r) continue;
      const Demand& d = dem[queue[u][r]];
      NodeId v = cx.map.node(g, g.id(d.s), g.id(d.t));
      env.push_back({u, v, 0, next_port(cnt, v, cx.window), Message(kFwd, {d.payload}, {g.id(d.s), g.id(d.t)})});
      carried.push_back(static_cast<std::int64_t>(orig[queue[u][r]]));
    }
    auto del = logged_exchange(net, StepKind::Forward, std::move(env), std::move(carried), 1, cx.window, log);
    for (const auto& e : del.all()) store[e.to][{e.msg.id[0], e.msg.id[1]}] = e.msg.w[0];
  }
  std::uint64_t load = 0;
  for (NodeId v = 0; v < n; ++v) load = std::max<std::uint64_t>(load, store[v].size());
  const double bound = balls_in_bins_bound(dem.size(), n);
  cx.res.max_load = std::max(cx.res.max_load, load);
  cx.res.load_bound = std::max(cx.res.load_bound, bound);
  cx.res.load_ok = cx.res.load_ok && static_cast<double>(load) <= bound;

  if (announce) {
    net.begin_phase("routing-announce");
    TokenSet ts;
    ts.payload_bits = 1;
    for (NodeId s : S) {
      ts.tokens.push_back(Token{g.id(s), 0, 0});
      ts.holder.push_back(s);
    }
    auto ann = k_disseminate(net, ts);
    if (!ann.complete()) throw std::logic_error("source ids did not reach every node");
  }

  // Each target splits its requests over its helpers.
  net.begin_phase("routing-requests");
  std::vector<std::vector<std::size_t>> rq(n);
  for (NodeId t : T) {
    auto& dt = by_tgt[t];
    std::sort(dt.begin(), dt.end(), [&](auto a, auto b) { return g.id(dem[a].s) < g.id(dem[b].s); });
    auto htw = helpers_of(ht, t);
    for (std::size_t i = 0; i < dt.size(); ++i) rq[htw[i % htw.size()]].push_back(dt[i]);
  }
  charge_local(net, hop, log);
  std::vector<std::uint64_t> rlen(n);
  for (NodeId v = 0; v < n; ++v) rlen[v] = rq[v].size();
  const std::uint64_t rounds2 = max_over_nodes(net, cx.tree, rlen);
  std::vector<std::vector<Arrival>> got(n);
  for (std::uint64_t r = 0; r < rounds2; ++r) {
    std::fill(cnt.begin(), cnt.end(), 0);
    std::vector<PortedEnvelope> env;
    std::vector<std::size_t> asked;
    for (NodeId w = 0; w < n; ++w) {
      if (rq[w].size() <= r) continue;
      const Demand& d = dem[rq[w][r]];
      NodeId v = cx.map.node(g, g.id(d.s), g.id(d.t));
      env.push_back({w, v, 0, next_port(cnt, v, cx.window), Message(kReq, {}, {g.id(d.s), g.id(d.t), g.id(w)})});
      asked.push_back(rq[w][r]);
    }
    auto reqs = logged_exchange(net, StepKind::Request, std::move(env), std::vector<std::int64_t>(asked.size(), -1),
                                1, cx.window, log);
    std::fill(cnt.begin(), cnt.end(), 0);
    std::vector<PortedEnvelope> back;
    std::vector<std::int64_t> carried;
    for (const auto& e : reqs.all()) {
      auto it = store[e.to].find({e.msg.id[0], e.msg.id[1]});
      if (it == store[e.to].end()) {
        cx.res.undeliverable++;
        continue;
      }
      NodeId w = g.index_of(e.msg.id[2]);
      back.push_back({e.to, w, next_port(cnt, e.to, cx.window), 0,
                      Message(kRep, {it->second}, {e.msg.id[0], e.msg.id[1]})});
      carried.push_back(static_cast<std::int64_t>(orig[rq[w][r]]));
    }
    auto reps = logged_exchange(net, StepKind::Reply, std::move(back), std::move(carried), cx.window, 1, log);
    for (const auto& e : reps.all()) {
      const std::size_t d = rq[e.to][r];
      if (e.msg.id[0] != g.id(dem[d].s) || e.msg.id[1] != g.id(dem[d].t))
        throw std::logic_error("reply does not match its request");
      got[e.to].push_back({orig[d], dem[d].t, e.msg.id[0], e.msg.w[0]});
    }
  }
  charge_local(net, hop, log);
  for (auto& v : got)
    for (auto& a : v) out.push_back(a);
}

RoutingInstance part_instance(const std::vector<Demand>& dem) {
  RoutingInstance r;
  r.scenario = Scenario::RandSrcRandTgt;
  std::set<NodeId> s, t;
  for (const auto& d : dem) {
    s.insert(d.s);
    t.insert(d.t);
  }
  r.sources.assign(s.begin(), s.end());
  r.targets.assign(t.begin(), t.end());
  r.k = r.sources.size();
  r.l = r.targets.size();
  r.demands = dem;
  return r;
}

// Routes with sources holding the larger side; splits into consolidated
// parts when the source set is too large for helper sets.
void route_oriented(Ctx& cx, const RoutingInstance& inst, bool source_helpers, std::uint32_t nq, Log* log,
                    std::vector<Arrival>& out) {
  Network& net = cx.net;
  const Graph& g = net.graph();
  std::vector<std::size_t> ident(inst.demands.size());
  std::iota(ident.begin(), ident.end(), 0);
  const double bound = std::sqrt(static_cast<double>(g.n()) * nq);
  if (!source_helpers || static_cast<double>(inst.k) <= bound) {
    route_core(cx, inst.demands, ident, inst.sources, inst.targets, source_helpers, true, log, out);
    return;
  }
  const Clustering& cl = cx.clusters(std::max<std::uint64_t>(inst.k, 1));
  Consolidation cons = consolidate_sources(net, inst, cl);
  cx.res.parts = cons.parts.size();
  const std::uint64_t hop = 2ull * std::max<std::uint32_t>(cl.radius, 1);
  charge_local(net, hop, log);  // sources hand their messages to their collectors
  for (std::size_t p = 0; p < cons.parts.size(); ++p) {
    const auto& part = cons.parts[p];
    // Sub-targets tell their super sources where to send.
    std::vector<Demand> rev;
    for (const auto& d : part.demands) rev.push_back({d.t, d.s, 0});
    std::vector<std::size_t> none(rev.size(), 0);
    std::vector<Arrival> ignored;
    route_core(cx, rev, none, part.targets, part.sources, true, false, nullptr, ignored);
    std::vector<Arrival> got;
    route_core(cx, part.demands, cons.origin[p], part.sources, part.targets, true, false, log, got);
    for (auto& a : got) {
      const Demand& d = inst.demands[a.orig];
      out.push_back({a.orig, d.t, g.id(d.s), a.payload});
    }
  }
  charge_local(net, hop, log);  // sub-targets pass messages to their targets
}

// Runs the log backwards: every hop of a logging message t -> s is taken in
// the opposite direction by the message s -> t.
void replay_reversed(Network& net, const Log& log, const RoutingInstance& inst, std::vector<Arrival>& out) {
  const Graph& g = net.graph();
  net.begin_phase("routing-replay");
  std::vector<Arrival> arrived;
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    const Step& st = *it;
    if (st.kind == StepKind::Local) {
      net.local_rounds(st.local);
      continue;
    }
    std::vector<PortedEnvelope> env;
    for (std::size_t i = 0; i < st.env.size(); ++i) {
      if (st.carried[i] < 0) continue;
      const Demand& d = inst.demands[static_cast<std::size_t>(st.carried[i])];
      const auto& e = st.env[i];
      env.push_back({e.to, e.from, e.recv_port, e.send_port, Message(kFwd, {d.payload}, {g.id(d.s), g.id(d.t)})});
    }
    auto del = net.exchange(std::move(env), st.rp, st.sp);
    if (st.kind == StepKind::Forward)
      for (const auto& e : del.all()) {
        NodeId t = g.index_of(e.msg.id[1]);
        arrived.push_back({0, t, e.msg.id[0], e.msg.w[0]});
      }
  }
  out.insert(out.end(), arrived.begin(), arrived.end());
}

std::vector<NodeId> select(const Graph& g, Selection sel, std::uint64_t k, Rng& rng) {
  std::vector<NodeId> out;
  const std::size_t n = g.n();
  if (sel == Selection::Arbitrary) {
    for (NodeId v = 0; v < std::min<std::uint64_t>(k, n); ++v) out.push_back(v);
  } else {
    const double p = std::min(1.0, static_cast<double>(k) / n);
    for (NodeId v = 0; v < n; ++v)
      if (rng.bernoulli(p)) out.push_back(v);
  }
  return out;
}

std::uint32_t default_payload_bits(const Network& net) {
  std::int64_t b = static_cast<std::int64_t>(net.msg_bits()) - 2 * static_cast<std::int64_t>(net.id_bits());
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(b, 1, 63));
}

}  // namespace

double HelperAssignment::hop_bound(std::size_t n) const { return kHopC * nq * log_n(n); }
double HelperAssignment::membership_bound(std::size_t n) const { return kMembershipC * log_n(n); }

HelperAssignment adaptive_helpers(Network& net, const std::vector<NodeId>& W, std::uint64_t k, const Clustering& cl,
                                  double c) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (k < 1) throw ConfigError("k must be >= 1");
  HelperAssignment h;
  h.k = k;
  h.nq = cl.nq;
  h.W = W;
  std::sort(h.W.begin(), h.W.end());
  h.W.erase(std::unique(h.W.begin(), h.W.end()), h.W.end());
  for (NodeId w : h.W)
    if (w >= n) throw ConfigError("helper owner out of range");
  h.membership.assign(n, 0);
  h.helpers.resize(h.W.size());
  h.join_prob.assign(cl.count(), 0.0);
  if (h.W.empty()) return h;
  const double expect = static_cast<double>(n) * cl.nq / k;
  h.precondition_flag = static_cast<double>(h.W.size()) > expect + 3 * std::sqrt(expect) + 1;

  const std::uint64_t start = net.rounds();
  // Members learn C and C cap W, then helpers report back to their owners.
  net.local_rounds(2ull * std::max<std::uint32_t>(cl.radius, 1));
  std::vector<std::vector<std::size_t>> owners(cl.count());
  for (std::size_t i = 0; i < h.W.size(); ++i) owners[cl.cluster[h.W[i]]].push_back(i);
  const double ln = ln_n(n);
  for (std::size_t c_i = 0; c_i < cl.count(); ++c_i) {
    const double size = static_cast<double>(cl.members[c_i].size());
    const double q = std::min(1.0, static_cast<double>(k) / cl.nq / size * 8.0 * c * ln);
    h.join_prob[c_i] = q;
    for (NodeId v : cl.members[c_i])
      for (std::size_t i : owners[c_i])
        if (net.rng(v).bernoulli(q)) {
          h.helpers[i].push_back(v);
          h.membership[v]++;
        }
  }
  net.local_rounds(2ull * std::max<std::uint32_t>(cl.radius, 1));
  h.rounds = net.rounds() - start;

  h.min_size = std::numeric_limits<std::size_t>::max();
  const auto limit = static_cast<std::uint32_t>(h.hop_bound(n)) + 1;
  for (std::size_t i = 0; i < h.W.size(); ++i) {
    h.min_size = std::min(h.min_size, h.helpers[i].size());
    auto dist = bfs_hops(g, h.W[i], limit);
    for (NodeId u : h.helpers[i]) h.max_hop = std::max(h.max_hop, dist[u]);
  }
  h.max_membership = *std::max_element(h.membership.begin(), h.membership.end());
  return h;
}

HelperAssignment adaptive_helpers(Network& net, const std::vector<NodeId>& W, std::uint64_t k, double c) {
  if (W.empty()) {
    HelperAssignment h;
    h.k = k;
    h.membership.assign(net.n(), 0);
    return h;
  }
  const std::uint64_t start = net.rounds();
  auto tree = build_virtual_tree(net);
  auto nq = nq_distributed(net, k, &tree);
  auto cl = cluster_partition(net, k, &nq, &tree);
  auto h = adaptive_helpers(net, W, k, cl, c);
  h.rounds = net.rounds() - start;
  return h;
}

double balls_in_bins_bound(std::uint64_t balls, std::uint64_t bins) {
  bins = std::max<std::uint64_t>(bins, 1);
  const double ln = ln_n(bins);
  const double xi = static_cast<double>(balls) / (static_cast<double>(bins) * ln);
  const double c = std::max(2.0, xi / 3.0);
  return static_cast<double>(balls) / static_cast<double>(bins) + 3.0 * c * ln;
}

NodeId IntermediateMap::node(const Graph& g, Ident i, Ident j) const {
  return static_cast<NodeId>(h.eval(i, j) % g.n());
}

IntermediateMap intermediate_map(Network& net, std::uint64_t k, std::uint64_t l, std::uint32_t nq) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (k < 1 || l < 1) throw ConfigError("k and l must be >= 1");
  IntermediateMap m;
  m.constraint_flag = k * l > static_cast<std::uint64_t>(std::max<std::uint32_t>(nq, 1)) * n;
  m.kappa = std::max<std::uint32_t>(1, nq * net.log_n());
  const std::uint64_t start = net.rounds();
  net.begin_phase("hash-seed");
  auto tree = build_virtual_tree(net);
  const NodeId root = tree.root();
  const std::uint64_t p = next_prime(std::max<std::uint64_t>(static_cast<std::uint64_t>(n) * n, 2));
  std::vector<std::uint64_t> coeff(m.kappa);
  for (auto& x : coeff) x = net.rng(root).below(p);

  // Coefficients travel as tokens of pb bits each.
  const std::uint32_t B = bitwidth(p - 1);
  std::uint32_t pb = 63, chunks = 1;
  for (int it = 0; it < 8; ++it) {
    chunks = (B + pb - 1) / pb;
    std::uint32_t nb = max_payload_bits(net, std::min<std::uint64_t>(static_cast<std::uint64_t>(m.kappa) * chunks, n));
    nb = std::min<std::uint32_t>(nb, 63);
    if (nb == 0) throw ConfigError("global messages leave no room for hash coefficients");
    if (nb == pb) break;
    pb = nb;
  }
  chunks = (B + pb - 1) / pb;
  std::vector<std::uint64_t> pieces;
  for (auto x : coeff)
    for (std::uint32_t c = 0; c < chunks; ++c) pieces.push_back(x >> (c * pb) & ((1ull << pb) - 1));
  std::vector<std::uint64_t> heard(pieces.size(), 0);
  for (std::size_t lo = 0; lo < pieces.size(); lo += n) {
    TokenSet ts;
    ts.payload_bits = pb;
    for (std::size_t i = lo; i < std::min(pieces.size(), lo + n); ++i) {
      ts.tokens.push_back(Token{g.id(root), static_cast<std::uint32_t>(i - lo), pieces[i]});
      ts.holder.push_back(root);
    }
    auto r = k_disseminate(net, ts);
    if (!r.complete()) throw std::logic_error("hash seed did not reach every node");
    for (const auto& t : r.output(static_cast<NodeId>(n - 1))) heard[lo + t.seq] = t.payload;
  }
  std::vector<std::uint64_t> rebuilt(m.kappa, 0);
  for (std::size_t i = 0; i < heard.size(); ++i) rebuilt[i / chunks] |= heard[i] << ((i % chunks) * pb);
  m.h = hash_from_coefficients(n, std::move(rebuilt));
  m.rounds = net.rounds() - start;
  return m;
}

IntermediateMap intermediate_map(Network& net, std::uint64_t k, std::uint64_t l) {
  auto nq = nq_distributed(net, std::max(k, l));
  return intermediate_map(net, k, l, nq.value);
}

std::vector<std::uint64_t> intermediate_loads(const Graph& g, const IntermediateMap& m,
                                              const std::vector<std::pair<Ident, Ident>>& pairs) {
  std::vector<std::uint64_t> load(g.n(), 0);
  for (auto [i, j] : pairs) load[m.node(g, i, j)]++;
  return load;
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::ArbSrcRandTgt: return "arb_src_rand_tgt";
    case Scenario::RandSrcArbTgt: return "rand_src_arb_tgt";
    case Scenario::RandSrcRandTgt: return "rand_src_rand_tgt";
  }
  return "?";
}

Scenario parse_scenario(const std::string& s) {
  if (s == "1" || s == "arb_src_rand_tgt") return Scenario::ArbSrcRandTgt;
  if (s == "2" || s == "rand_src_arb_tgt") return Scenario::RandSrcArbTgt;
  if (s == "3" || s == "rand_src_rand_tgt") return Scenario::RandSrcRandTgt;
  throw ConfigError("unknown routing scenario '" + s + "'");
}

RoutingInstance RoutingInstance::complete(const Network& net, Scenario sc, std::vector<NodeId> S, std::vector<NodeId> T,
                                          std::uint64_t seed, std::uint32_t payload_bits) {
  RoutingInstance r;
  r.scenario = sc;
  std::sort(S.begin(), S.end());
  S.erase(std::unique(S.begin(), S.end()), S.end());
  std::sort(T.begin(), T.end());
  T.erase(std::unique(T.begin(), T.end()), T.end());
  r.sources = std::move(S);
  r.targets = std::move(T);
  r.k = r.sources.size();
  r.l = r.targets.size();
  r.payload_bits = payload_bits == 0 ? default_payload_bits(net) : payload_bits;
  if (r.payload_bits > 63) throw ConfigError("payload wider than 63 bits");
  Rng rng(seed, 0x9a71);
  for (NodeId s : r.sources)
    for (NodeId t : r.targets) r.demands.push_back({s, t, rng.below(1ull << r.payload_bits)});
  return r;
}

RoutingInstance RoutingInstance::make(const Network& net, Scenario sc, Selection src, Selection tgt, std::uint64_t k,
                                      std::uint64_t l, std::uint64_t seed, std::uint32_t payload_bits) {
  if (k < 1 || l < 1) throw ConfigError("k and l must be >= 1");
  if (k > net.n() || l > net.n()) throw ConfigError("k and l must not exceed n");
  Rng rs(seed, 0x5e1), rt(seed, 0x7a9);
  auto r = complete(net, sc, select(net.graph(), src, k, rs), select(net.graph(), tgt, l, rt), seed, payload_bits);
  r.k = k;
  r.l = l;
  return r;
}

RoutingInstance RoutingInstance::make(const Network& net, Scenario sc, std::uint64_t k, std::uint64_t l,
                                      std::uint64_t seed, std::uint32_t payload_bits) {
  Selection src = sc == Scenario::ArbSrcRandTgt ? Selection::Arbitrary : Selection::Random;
  Selection tgt = sc == Scenario::RandSrcArbTgt ? Selection::Arbitrary : Selection::Random;
  return make(net, sc, src, tgt, k, l, seed, payload_bits);
}

RoutingInstance RoutingInstance::from_json(const Network& net, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("routing instance: ") + e.what());
  }
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw ConfigError(std::string("routing instance: missing field '") + key + "'");
    return j.at(key);
  };
  const auto& sj = field("scenario");
  Scenario sc = parse_scenario(sj.is_string() ? sj.get<std::string>() : std::to_string(sj.get<int>()));
  const std::uint64_t seed = j.value("seed", 1ull);
  const std::uint32_t pb = j.value("payload_bits", 0u);
  const Graph& g = net.graph();
  auto side = [&](const char* key, const char* count, std::vector<NodeId>& out, Selection& sel, std::uint64_t& k) {
    const auto& v = field(key);
    if (v.is_array()) {
      sel = Selection::List;
      for (const auto& x : v) {
        Ident id = x.get<Ident>();
        if (!g.has_id(id)) throw ConfigError(std::string("routing instance: ") + key + " lists unknown id " +
                                             std::to_string(id));
        out.push_back(g.index_of(id));
      }
      k = out.size();
      return;
    }
    std::string mode = v.get<std::string>();
    if (mode == "random") sel = Selection::Random;
    else if (mode == "arbitrary") sel = Selection::Arbitrary;
    else throw ConfigError(std::string("routing instance: ") + key + " must be random, arbitrary or a list");
    k = field(count).get<std::uint64_t>();
  };
  std::vector<NodeId> S, T;
  Selection ss{}, st{};
  std::uint64_t k = 0, l = 0;
  side("sources", "k", S, ss, k);
  side("targets", "l", T, st, l);
  Rng rs(seed, 0x5e1), rt(seed, 0x7a9);
  if (ss != Selection::List) S = select(g, ss, k, rs);
  if (st != Selection::List) T = select(g, st, l, rt);
  auto r = complete(net, sc, S, T, seed, pb);
  r.k = std::max<std::uint64_t>(k, 1);
  r.l = std::max<std::uint64_t>(l, 1);
  r.validate(net);
  return r;
}

void RoutingInstance::validate(const Network& net) const {
  const std::size_t n = net.n();
  auto sorted_unique = [&](const std::vector<NodeId>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] >= n) throw ConfigError(std::string(what) + " out of range");
      if (i && v[i - 1] >= v[i]) throw ConfigError(std::string(what) + " must be sorted and distinct");
    }
  };
  sorted_unique(sources, "sources");
  sorted_unique(targets, "targets");
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& d : demands) {
    if (!std::binary_search(sources.begin(), sources.end(), d.s)) throw ConfigError("demand from a non-source");
    if (!std::binary_search(targets.begin(), targets.end(), d.t)) throw ConfigError("demand to a non-target");
    if (!seen.insert({d.s, d.t}).second) throw ConfigError("two messages for the same source-target pair");
    if (bitwidth(d.payload) > payload_bits) throw ConfigError("payload wider than declared");
  }
  if (2ull * net.id_bits() + payload_bits > net.msg_bits())
    throw ConfigError("a routed message needs " + std::to_string(2 * net.id_bits() + payload_bits) +
                      " bits, messages carry " + std::to_string(net.msg_bits()));
}

ScenarioCheck check_scenario(const RoutingInstance& inst, std::uint32_t nq_k, std::uint32_t nq_l, std::size_t n) {
  ScenarioCheck c;
  c.nq_k = nq_k;
  c.nq_l = nq_l;
  switch (inst.scenario) {
    case Scenario::ArbSrcRandTgt:
      c.ok = inst.l <= nq_k;
      if (!c.ok) c.reason = "l exceeds NQ_k";
      break;
    case Scenario::RandSrcArbTgt:
      c.ok = inst.k <= nq_l;
      if (!c.ok) c.reason = "k exceeds NQ_l";
      break;
    case Scenario::RandSrcRandTgt: {
      std::uint64_t nq = inst.k >= inst.l ? nq_k : nq_l;
      c.ok = inst.k * inst.l <= nq * n;
      if (!c.ok) c.reason = "k*l exceeds NQ*n";
      break;
    }
  }
  return c;
}

std::size_t Consolidation::max_k() const {
  std::size_t m = 0;
  for (const auto& p : parts) m = std::max(m, p.sources.size());
  return m;
}

std::size_t Consolidation::max_l() const {
  std::size_t m = 0;
  for (const auto& p : parts) m = std::max(m, p.targets.size());
  return m;
}

Consolidation consolidate_sources(Network& net, const RoutingInstance& inst, const Clustering& cl, double c) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  const std::uint64_t k = std::max<std::uint64_t>(inst.k, inst.sources.size());
  const std::uint64_t l = inst.l;
  Consolidation out;
  out.bound = std::sqrt(static_cast<double>(n) * cl.nq);
  out.precondition_flag = !(l <= k && k * l <= static_cast<std::uint64_t>(cl.nq) * n);
  if (static_cast<double>(k) <= out.bound) {
    out.parts.push_back(inst);
    out.origin.emplace_back(inst.demands.size());
    std::iota(out.origin[0].begin(), out.origin[0].end(), 0);
    out.super_sources = inst.sources;
    out.sub_targets = inst.targets;
    return out;
  }
  out.identity = false;
  const std::uint64_t start = net.rounds();
  net.begin_phase("consolidate");
  const double ln = ln_n(n);
  const std::uint64_t hop = 2ull * std::max<std::uint32_t>(cl.radius, 1);
  out.p = std::min(static_cast<double>(cl.nq) * n / (static_cast<double>(k) * k) * 8.0 * c * ln, 1.0);
  out.q = std::min(static_cast<double>(k) / n * 8.0 * c * ln, 1.0);

  std::vector<char> is_super(n, 0);
  for (NodeId s : inst.sources)
    if (net.rng(s).bernoulli(out.p)) is_super[s] = 1;
  std::vector<std::vector<NodeId>> src_in(cl.count()), sup_in(cl.count());
  for (NodeId s : inst.sources) src_in[cl.cluster[s]].push_back(s);
  net.local_rounds(hop);
  out.collector.assign(n, kNoNode);
  for (std::size_t ci = 0; ci < cl.count(); ++ci) {
    if (src_in[ci].empty()) continue;
    for (NodeId s : src_in[ci])
      if (is_super[s]) sup_in[ci].push_back(s);
    if (sup_in[ci].empty()) {
      out.every_cluster_covered = false;
      out.promoted++;
      is_super[src_in[ci].front()] = 1;
      sup_in[ci].push_back(src_in[ci].front());
    }
    for (std::size_t i = 0; i < src_in[ci].size(); ++i)
      out.collector[src_in[ci][i]] = sup_in[ci][i % sup_in[ci].size()];
  }
  for (NodeId s : inst.sources)
    if (is_super[s]) out.super_sources.push_back(s);

  // Publish who collects for whom.
  TokenSet ts;
  ts.payload_bits = net.id_bits();
  for (NodeId s : inst.sources) {
    ts.tokens.push_back(Token{g.id(s), 0, g.id(out.collector[s])});
    ts.holder.push_back(s);
  }
  if (!k_disseminate(net, ts).complete()) throw std::logic_error("collector table did not reach every node");

  // Sub-targets, handed out within each cluster.
  std::vector<std::vector<NodeId>> tgt_in(cl.count()), sub_in(cl.count());
  std::vector<char> is_sub(n, 0);
  for (NodeId v = 0; v < n; ++v)
    if (net.rng(v).bernoulli(out.q)) {
      is_sub[v] = 1;
      sub_in[cl.cluster[v]].push_back(v);
    }
  for (NodeId t : inst.targets) tgt_in[cl.cluster[t]].push_back(t);
  out.assigned.assign(n, {});
  for (std::size_t ci = 0; ci < cl.count(); ++ci) {
    if (tgt_in[ci].empty()) continue;
    if (sub_in[ci].empty()) {
      for (NodeId t : tgt_in[ci]) out.assigned[t] = {t};
      continue;
    }
    for (std::size_t j = 0; j < sub_in[ci].size(); ++j) out.assigned[tgt_in[ci][j % tgt_in[ci].size()]].push_back(sub_in[ci][j]);
    for (NodeId t : tgt_in[ci])
      if (out.assigned[t].empty()) out.assigned[t] = {t};
  }
  net.local_rounds(hop);

  // Message from the j-th source of the a-th super source goes to sub-target
  // (a + j) mod Z of its target; repeated (s', t') pairs go to later layers.
  std::map<NodeId, std::size_t> sup_rank;
  for (std::size_t a = 0; a < out.super_sources.size(); ++a) sup_rank[out.super_sources[a]] = a;
  std::map<NodeId, std::size_t> src_rank;
  {
    std::map<NodeId, std::size_t> next;
    for (NodeId s : inst.sources) src_rank[s] = next[out.collector[s]]++;
  }
  struct Routed {
    NodeId s, t;
    std::size_t orig;
    std::uint32_t layer;
  };
  std::vector<Routed> routed;
  std::map<std::pair<NodeId, NodeId>, std::uint32_t> uses;
  std::set<NodeId> used_t;
  for (std::size_t i = 0; i < inst.demands.size(); ++i) {
    const Demand& d = inst.demands[i];
    NodeId sp = out.collector[d.s];
    const auto& Z = out.assigned[d.t];
    NodeId tp = Z[(sup_rank[sp] + src_rank[d.s]) % Z.size()];
    routed.push_back({sp, tp, i, uses[{sp, tp}]++});
    used_t.insert(tp);
  }
  out.sub_targets.assign(used_t.begin(), used_t.end());

  // Random grouping keeps every part below the bound.
  auto groups = [&](std::size_t m) {
    return static_cast<std::uint64_t>(m > out.bound ? std::ceil(2.0 * m / out.bound) : 1.0);
  };
  const std::uint64_t gs = groups(out.super_sources.size()), gt = groups(out.sub_targets.size());
  std::vector<std::uint64_t> grp(n, 0);
  for (NodeId s : out.super_sources) grp[s] = net.rng(s).below(gs);
  std::vector<std::uint64_t> grp_t(n, 0);
  for (NodeId t : out.sub_targets) grp_t[t] = net.rng(t).below(gt);
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint32_t>, std::size_t> part_of;
  std::vector<std::vector<Demand>> part_dem;
  for (const auto& r : routed) {
    auto key = std::make_tuple(grp[r.s], grp_t[r.t], r.layer);
    auto it = part_of.find(key);
    if (it == part_of.end()) {
      it = part_of.emplace(key, part_dem.size()).first;
      part_dem.emplace_back();
      out.origin.emplace_back();
    }
    part_dem[it->second].push_back({r.s, r.t, inst.demands[r.orig].payload});
    out.origin[it->second].push_back(r.orig);
  }
  for (auto& pd : part_dem) {
    auto part = part_instance(pd);
    part.payload_bits = inst.payload_bits;
    out.parts.push_back(std::move(part));
  }
  out.rounds = net.rounds() - start;
  return out;
}

Consolidation consolidate_sources(Network& net, const RoutingInstance& inst, double c) {
  auto tree = build_virtual_tree(net);
  auto nq = nq_distributed(net, std::max<std::uint64_t>(inst.k, 1), &tree);
  auto cl = cluster_partition(net, std::max<std::uint64_t>(inst.k, 1), &nq, &tree);
  return consolidate_sources(net, inst, cl, c);
}

RoutingResult kl_route(Network& net, const RoutingInstance& inst) {
  if (net.hybrid0()) throw ConfigError("kl_route runs in the HYBRID model only");
  inst.validate(net);
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  RoutingResult res;
  res.received.assign(n, {});
  res.membership_bound = kMembershipC * log_n(n);
  const std::uint64_t start = net.rounds();
  if (inst.demands.empty()) return res;

  net.begin_phase("routing-setup");
  auto tree = build_virtual_tree(net);
  auto nq_k = nq_distributed(net, std::max<std::uint64_t>(inst.k, 1), &tree);
  auto nq_l = nq_distributed(net, std::max<std::uint64_t>(inst.l, 1), &tree);
  res.scenario = check_scenario(inst, nq_k.value, nq_l.value, n);
  const bool reverse =
      inst.scenario == Scenario::RandSrcArbTgt || (inst.scenario == Scenario::RandSrcRandTgt && inst.l > inst.k);
  const std::uint32_t nq_big = reverse ? nq_l.value : nq_k.value;
  auto map = intermediate_map(net, inst.k, inst.l, nq_big);
  res.recv_window = static_cast<std::uint32_t>(std::ceil(balls_in_bins_bound(n, n)));
  Ctx cx{net, tree, map, res, res.recv_window, {}};
  const bool helpers = inst.scenario == Scenario::RandSrcRandTgt;

  std::vector<Arrival> out;
  if (!reverse) {
    route_oriented(cx, inst, helpers, nq_big, nullptr, out);
  } else {
    // Logging messages travel t -> s first; the real messages retrace them.
    res.reversed = true;
    RoutingInstance rev = inst;
    std::swap(rev.sources, rev.targets);
    std::swap(rev.k, rev.l);
    for (auto& d : rev.demands) {
      std::swap(d.s, d.t);
      d.payload = 0;
    }
    Log log;
    std::vector<Arrival> logging;
    route_oriented(cx, rev, helpers, nq_big, &log, logging);
    replay_reversed(net, log, inst, out);
  }
  for (const auto& a : out) res.received[a.at].push_back({a.s, a.payload});
  for (auto& r : res.received) std::sort(r.begin(), r.end());
  res.rounds = net.rounds() - start;
  return res;
}

DeliveryCheck check_delivery(const Graph& g, const RoutingInstance& inst, const RoutingResult& r) {
  DeliveryCheck c;
  std::vector<std::map<Ident, std::uint64_t>> want(g.n());
  for (const auto& d : inst.demands) want[d.t][g.id(d.s)] = d.payload;
  c.expected = inst.demands.size();
  for (NodeId v = 0; v < g.n() && v < r.received.size(); ++v) {
    std::set<Ident> seen;
    for (auto [s, p] : r.received[v]) {
      auto it = want[v].find(s);
      if (it == want[v].end()) {
        c.wrong++;
      } else if (!seen.insert(s).second) {
        c.duplicates++;
      } else if (it->second != p) {
        c.wrong++;
      } else {
        c.delivered++;
      }
    }
  }
  c.missing = c.expected - c.delivered;
  return c;
}

}  // namespace hyb
