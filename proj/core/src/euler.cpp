#include "hybrid/euler.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <tuple>
#include <cmath>
#include <deque>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <queue>

#include "hybrid/distances.hpp"
#include "hybrid/rng.hpp"

namespace hyb {

namespace {

struct Dsu {
  std::vector<std::uint32_t> p;
  explicit Dsu(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  std::uint32_t find(std::uint32_t x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    p[b] = a;
    return true;
  }
};

}  // namespace

// ------------------------------------------------------------------ multigraph

std::uint32_t Multigraph::add(NodeId u, NodeId v, std::uint32_t gedge) {
  if (u >= n || v >= n) throw ConfigError("multigraph edge endpoint out of range");
  edges.push_back({u, v, gedge});
  return static_cast<std::uint32_t>(edges.size() - 1);
}

std::vector<std::uint32_t> Multigraph::degrees() const {
  std::vector<std::uint32_t> d(n, 0);
  for (const auto& e : edges) ++d[e.u], ++d[e.v];
  return d;
}

Multigraph Multigraph::from_graph(const Graph& g) {
  Multigraph h;
  h.n = g.n();
  for (std::uint32_t e = 0; e < g.m(); ++e) h.add(g.edge(e).u, g.edge(e).v, e);
  return h;
}

Orientation Orientation::make(const Multigraph& h, std::vector<char> forward) {
  Orientation o;
  o.forward = std::move(forward);
  o.indeg.assign(h.n, 0);
  o.outdeg.assign(h.n, 0);
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    const auto& e = h.edges[i];
    NodeId from = o.forward[i] ? e.u : e.v, to = o.forward[i] ? e.v : e.u;
    ++o.outdeg[from];
    ++o.indeg[to];
  }
  return o;
}

bool Orientation::eulerian() const { return imbalance() == 0; }

std::uint64_t Orientation::imbalance() const {
  std::uint64_t s = 0;
  for (std::size_t v = 0; v < indeg.size(); ++v)
    s += indeg[v] > outdeg[v] ? indeg[v] - outdeg[v] : outdeg[v] - indeg[v];
  return s;
}

void Orientation::write_edges(std::ostream& os, const Multigraph& h, const std::vector<Ident>& label) const {
  auto name = [&](NodeId v) { return v < label.size() ? label[v] : static_cast<Ident>(v); };
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    const auto& e = h.edges[i];
    if (forward[i]) os << name(e.u) << ' ' << name(e.v) << '\n';
    else os << name(e.v) << ' ' << name(e.u) << '\n';
  }
}

// ------------------------------------------------------------------ minor rounds

MinorRoundResult minor_round_reference(const Graph& g, const MinorRoundSpec& spec) {
  const std::size_t n = g.n();
  Dsu d(n);
  for (std::uint32_t e = 0; e < g.m(); ++e)
    if (spec.contract[e]) d.unite(g.edge(e).u, g.edge(e).v);
  MinorRoundResult r;
  r.supernode.resize(n);
  for (NodeId v = 0; v < n; ++v) r.supernode[v] = d.find(v);
  std::vector<std::uint64_t> y(n, 0), agg(n, 0);
  std::vector<char> hy(n, 0), ha(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    NodeId s = r.supernode[v];
    y[s] = hy[s] ? fold(spec.consensus, y[s], spec.x[v]) : spec.x[v];
    hy[s] = 1;
  }
  for (std::uint32_t e = 0; e < g.m(); ++e) {
    NodeId a = r.supernode[g.edge(e).u], b = r.supernode[g.edge(e).v];
    if (a == b) continue;
    agg[a] = ha[a] ? fold(spec.aggregate, agg[a], spec.za[e]) : spec.za[e];
    ha[a] = 1;
    agg[b] = ha[b] ? fold(spec.aggregate, agg[b], spec.zb[e]) : spec.zb[e];
    ha[b] = 1;
  }
  r.y.resize(n);
  r.agg.resize(n);
  r.has_agg.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    r.y[v] = y[r.supernode[v]];
    r.agg[v] = agg[r.supernode[v]];
    r.has_agg[v] = ha[r.supernode[v]];
  }
  return r;
}

MinorRoundResult minor_round(Network& net, const MinorRoundSpec& spec) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (spec.contract.size() != g.m() || spec.x.size() != n || spec.za.size() != g.m() || spec.zb.size() != g.m())
    throw ConfigError("minor round spec does not match the graph");
  // Values travel next to a node index (consensus) or a presence bit (aggregate).
  // Under Sum32 a partial sum can reach the (wrapped) total, so that is what must fit.
  auto widest = [](AggOp op, std::initializer_list<const std::vector<std::uint64_t>*> lists) {
    std::uint64_t top = 0, sum = 0;
    for (const auto* l : lists)
      for (auto v : *l) {
        top = std::max(top, v);
        sum = std::min<std::uint64_t>(sum + v, 0xFFFFFFFFULL);
      }
    return op == AggOp::Sum32 ? sum : top;
  };
  if (bitwidth(widest(spec.consensus, {&spec.x})) + net.id_bits() > net.msg_bits() ||
      bitwidth(widest(spec.aggregate, {&spec.za, &spec.zb})) + net.id_bits() > net.msg_bits())
    throw ConfigError("minor round value does not fit one message next to a node id");
  std::uint64_t start = net.rounds();
  VirtualTree forest = build_component_forest(net, [&](std::uint32_t e) { return spec.contract[e] != 0; });

  // Consensus together with the smallest member index as the supernode name.
  AggFn cons;
  cons.words = 2;
  AggOp op = spec.consensus;
  cons.combine = [op](const AggVal& a, const AggVal& b) {
    return AggVal{std::min(a[0], b[0]), fold(op, a[1], b[1])};
  };
  std::vector<AggVal> in(n);
  for (NodeId v = 0; v < n; ++v) in[v] = {v, spec.x[v]};
  auto out = aggregate_broadcast(net, forest, in, cons);

  MinorRoundResult r;
  r.supernode.resize(n);
  r.y.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    r.supernode[v] = static_cast<NodeId>(out[v][0]);
    r.y[v] = out[v][1];
  }
  // Neighbors swap supernode names over the local edges.
  net.local_rounds(1, 2 * g.m(), 2 * g.m() * net.id_bits());

  AggFn ag;
  ag.words = 2;
  AggOp aop = spec.aggregate;
  ag.combine = [aop](const AggVal& a, const AggVal& b) {
    if (!a[1]) return b;
    if (!b[1]) return a;
    return AggVal{fold(aop, a[0], b[0]), 1};
  };
  std::vector<AggVal> part(n, AggVal{0, 0});
  for (std::uint32_t e = 0; e < g.m(); ++e) {
    NodeId u = g.edge(e).u, v = g.edge(e).v;
    if (r.supernode[u] == r.supernode[v]) continue;
    part[u] = ag.combine(part[u], AggVal{spec.za[e], 1});
    part[v] = ag.combine(part[v], AggVal{spec.zb[e], 1});
  }
  auto res = aggregate_broadcast(net, forest, part, ag);
  r.agg.resize(n);
  r.has_agg.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    r.agg[v] = res[v][0];
    r.has_agg[v] = static_cast<char>(res[v][1]);
  }
  r.rounds = net.rounds() - start;
  return r;
}

// ------------------------------------------------------------------ forests

ForestDecomposition forest_decomposition(const Multigraph& g, std::uint32_t alpha, double c_f) {
  if (alpha < 1) throw ConfigError("arboricity bound must be >= 1");
  ForestDecomposition f;
  f.alpha = alpha;
  f.bound = static_cast<std::uint32_t>(std::floor(c_f * alpha));
  const std::size_t n = g.n;
  std::vector<std::vector<std::uint32_t>> inc(n);
  for (std::uint32_t i = 0; i < g.edges.size(); ++i) {
    inc[g.edges[i].u].push_back(i);
    if (g.edges[i].v != g.edges[i].u) inc[g.edges[i].v].push_back(i);
  }
  std::vector<char> forward(g.edges.size(), 1), done(g.edges.size(), 0), peeled(n, 0);
  std::vector<std::uint32_t> deg = g.degrees();
  std::size_t left = g.edges.size();
  std::vector<NodeId> tail(g.edges.size(), kNoNode);
  while (left > 0) {
    std::vector<NodeId> now;
    for (NodeId v = 0; v < n; ++v)
      if (!peeled[v] && deg[v] <= f.bound) now.push_back(v);
    if (now.empty()) {
      f.violated = true;
      std::size_t m = 0;
      for (NodeId v = 0; v < n; ++v)
        if (!peeled[v] && deg[v] > 0) f.witness.push_back(v);
      for (std::uint32_t i = 0; i < g.edges.size(); ++i) m += !done[i];
      f.witness_density = f.witness.size() > 1 ? static_cast<double>(m) / (f.witness.size() - 1) : 0.0;
      for (std::uint32_t i = 0; i < g.edges.size(); ++i)
        if (!done[i]) {
          forward[i] = g.edges[i].u <= g.edges[i].v;
          tail[i] = forward[i] ? g.edges[i].u : g.edges[i].v;
          done[i] = 1;
        }
      break;
    }
    ++f.iterations;
    for (NodeId v : now) peeled[v] = 2;
    for (NodeId v : now)
      for (auto i : inc[v]) {
        if (done[i]) continue;
        const auto& e = g.edges[i];
        NodeId o = e.u == v ? e.v : e.u;
        NodeId from = v;
        if (peeled[o] == 2 && o < v) from = o;
        forward[i] = from == e.u;
        tail[i] = from;
        done[i] = 1;
        --left;
        deg[e.u] -= 1;
        deg[e.v] -= 1;
      }
    for (NodeId v : now) peeled[v] = 1;
  }
  f.orientation = Orientation::make(g, std::move(forward));
  f.forest.assign(g.edges.size(), 0);
  std::vector<std::uint32_t> rank(n, 0);
  for (std::uint32_t i = 0; i < g.edges.size(); ++i) f.forest[i] = rank[tail[i]]++;
  for (NodeId v = 0; v < n; ++v) f.max_outdeg = std::max(f.max_outdeg, f.orientation.outdeg[v]);
  return f;
}

// ------------------------------------------------------------------ cycles

namespace {

struct LiveEdge {
  NodeId a, b;
  std::uint32_t orig;         // edge of h2, or kNone32 when contracted
  std::uint32_t left, right;  // parts (a-mid, mid-b) of a contracted edge
  NodeId mid;
};

}  // namespace

CycleOrientation orient_cycles(const Multigraph& h2, Network* net) {
  const std::size_t n = h2.n;
  auto deg = h2.degrees();
  for (NodeId v = 0; v < n; ++v)
    if (deg[v] != 2)
      throw ConfigError("cycle orientation needs degree 2 everywhere; node " + std::to_string(v) + " has degree " +
                        std::to_string(deg[v]));
  CycleOrientation r;
  std::uint64_t start = net ? net->rounds() : 0;

  std::vector<LiveEdge> le;
  std::vector<std::array<std::uint32_t, 2>> inc(n, {kNone32, kNone32});
  auto attach = [&](NodeId v, std::uint32_t e) {
    if (inc[v][0] == kNone32) inc[v][0] = e;
    else inc[v][1] = e;
  };
  for (std::uint32_t i = 0; i < h2.edges.size(); ++i) {
    le.push_back({h2.edges[i].u, h2.edges[i].v, i, kNone32, kNone32, kNoNode});
    attach(h2.edges[i].u, i);
    attach(h2.edges[i].v, i);
  }
  auto other = [&](std::uint32_t e, NodeId v) { return le[e].a == v ? le[e].b : le[e].a; };

  Dsu merged(n);
  auto charge = [&](std::uint32_t steps) {
    if (!net || steps == 0) return;
    const Graph& g = net->graph();
    MinorRoundSpec spec;
    spec.contract.assign(g.m(), 0);
    for (const auto& e : h2.edges)
      if (e.gedge < g.m() && merged.find(e.u) == merged.find(e.v)) spec.contract[e.gedge] = 1;
    spec.x.assign(g.n(), 0);
    spec.za.assign(g.m(), 0);
    spec.zb.assign(g.m(), 0);
    for (std::uint32_t s = 0; s < steps; ++s) minor_round(*net, spec);
  };

  std::vector<char> alive(n, 1);
  for (;;) {
    // Live cycles with three or more nodes keep contracting.
    std::vector<char> active(n, 0), seen(n, 0);
    std::size_t live = 0;
    for (NodeId s = 0; s < n; ++s) {
      if (!alive[s] || seen[s]) continue;
      std::vector<NodeId> cyc{s};
      seen[s] = 1;
      NodeId prev = s;
      std::uint32_t via = inc[s][0];
      NodeId cur = other(via, s);
      while (cur != s) {
        seen[cur] = 1;
        cyc.push_back(cur);
        std::uint32_t nxt = inc[cur][0] == via ? inc[cur][1] : inc[cur][0];
        prev = cur;
        via = nxt;
        cur = other(via, prev);
      }
      if (cyc.size() >= 3)
        for (NodeId v : cyc) active[v] = 1;
      live += cyc.size();
    }
    std::vector<NodeId> act;
    for (NodeId v = 0; v < n; ++v)
      if (active[v]) act.push_back(v);
    if (act.empty()) break;
    r.sizes.push_back(act.size());
    ++r.iterations;

    // Color reduction: a node's new color is the set of (bit index, own bit)
    // pairs against both neighbors, which stays proper.
    std::vector<std::uint64_t> col(n, 0);
    for (NodeId v : act) col[v] = v;
    std::uint32_t steps = 0;
    auto nb = [&](NodeId v, int k) { return other(inc[v][k], v); };
    std::uint64_t top = n;
    for (;;) {
      std::uint64_t base = 2ull * bitwidth(top);
      std::vector<std::uint64_t> nc(n, 0);
      std::uint64_t ntop = 0;
      for (NodeId v : act) {
        std::uint64_t p[2];
        for (int k = 0; k < 2; ++k) {
          std::uint64_t d = col[v] ^ col[nb(v, k)];
          std::uint32_t i = static_cast<std::uint32_t>(std::countr_zero(d));
          p[k] = 2ull * i + (col[v] >> i & 1u);
        }
        nc[v] = std::min(p[0], p[1]) * base + std::max(p[0], p[1]);
        ntop = std::max(ntop, nc[v] + 1);
      }
      if (ntop >= top) break;
      col.swap(nc);
      top = ntop;
      ++steps;
    }
    // Halve the palette: groups of six colors each shrink to three.
    while (top > 3) {
      for (std::uint64_t c = 5; c >= 3; --c) {
        for (NodeId v : act) {
          if (col[v] % 6 != c) continue;
          std::uint64_t g = col[v] / 6;
          for (std::uint64_t pick = 0; pick < 3; ++pick) {
            bool used = false;
            for (int k = 0; k < 2; ++k) {
              NodeId u = nb(v, k);
              used |= col[u] / 6 == g && col[u] % 6 == pick;
            }
            if (!used) {
              col[v] = g * 6 + pick;
              break;
            }
          }
        }
        ++steps;
      }
      for (NodeId v : act) col[v] = col[v] / 6 * 3 + col[v] % 6;
      top = (top + 5) / 6 * 3;
    }
    r.color_rounds += steps;

    // Maximal independent set by color classes.
    std::vector<char> in(n, 0);
    for (std::uint64_t c = 0; c < 3; ++c)
      for (NodeId v : act)
        if (col[v] == c && !in[nb(v, 0)] && !in[nb(v, 1)]) in[v] = 1;
    steps += 3;

    // Contract the independent nodes into their neighbors.
    for (NodeId v : act) {
      if (!in[v]) continue;
      std::uint32_t e0 = inc[v][0], e1 = inc[v][1];
      NodeId a = other(e0, v), b = other(e1, v);
      std::uint32_t ne = static_cast<std::uint32_t>(le.size());
      le.push_back({a, b, kNone32, e0, e1, v});
      (inc[a][0] == e0 ? inc[a][0] : inc[a][1]) = ne;
      (inc[b][0] == e1 ? inc[b][0] : inc[b][1]) = ne;
      alive[v] = 0;
      merged.unite(v, a);
    }
    steps += 1;
    charge(steps);
  }

  // Base cycles: a self-loop, or two parallel edges pointing opposite ways.
  std::vector<std::pair<NodeId, NodeId>> dir(le.size(), {kNoNode, kNoNode});
  for (NodeId v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    std::uint32_t e0 = inc[v][0], e1 = inc[v][1];
    if (e0 == e1) {
      dir[e0] = {v, v};
      continue;
    }
    NodeId u = other(e0, v);
    if (u == v) {
      dir[e0] = {v, v};
      continue;
    }
    if (v < u) {
      dir[e0] = {v, u};
      dir[e1] = {u, v};
    }
  }
  charge(1);
  for (std::size_t i = le.size(); i-- > 0;) {
    const auto& e = le[i];
    if (e.orig != kNone32) continue;
    auto [from, to] = dir[i];
    NodeId m = e.mid;
    // left joins a and mid, right joins mid and b.
    if (from == e.a) {
      dir[e.left] = {e.a, m};
      dir[e.right] = {m, e.b};
    } else {
      dir[e.right] = {e.b, m};
      dir[e.left] = {m, e.a};
    }
  }
  if (r.iterations > 0) charge(r.iterations);
  std::vector<char> forward(h2.edges.size(), 1);
  for (std::uint32_t i = 0; i < h2.edges.size(); ++i) forward[i] = dir[i].first == h2.edges[i].u;
  r.orientation = Orientation::make(h2, std::move(forward));
  if (net) r.rounds = net->rounds() - start;
  return r;
}

// ------------------------------------------------------------------ decomposition

NetworkDecomposition network_decomposition(const Graph& g, std::uint32_t power, std::uint64_t seed, double c_chi,
                                           double beta) {
  if (power < 1) throw ConfigError("power must be >= 1");
  if (!(beta > 0)) throw ConfigError("beta must be positive");
  const std::size_t n = g.n();
  NetworkDecomposition d;
  d.power = power;
  d.beta = beta;
  d.chi = static_cast<std::uint32_t>(std::max(1.0, std::ceil(c_chi * log_n(n))));
  double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  std::uint32_t R = static_cast<std::uint32_t>(std::max(1.0, std::ceil(4.0 * ln / beta)));
  d.diameter_bound = 2 * R * power;
  d.cluster.assign(n, kNone32);

  std::vector<std::vector<NodeId>> P(n);
  for (NodeId v = 0; v < n; ++v)
    for (NodeId u : ball(g, v, power))
      if (u != v) P[v].push_back(u);

  std::size_t left = n;
  Rng rng(seed, 0xd3c);
  for (std::uint32_t color = 0; left > 0; ++color) {
    if (color > 64 * d.chi + 64) throw std::logic_error("network decomposition made no progress");
    std::vector<std::uint32_t> comp(n, kNone32);
    std::vector<std::vector<NodeId>> comps;
    for (NodeId s = 0; s < n; ++s) {
      if (d.cluster[s] != kNone32 || comp[s] != kNone32) continue;
      std::vector<NodeId> q{s};
      comp[s] = static_cast<std::uint32_t>(comps.size());
      for (std::size_t i = 0; i < q.size(); ++i)
        for (NodeId u : P[q[i]])
          if (d.cluster[u] == kNone32 && comp[u] == kNone32) comp[u] = comp[s], q.push_back(u);
      comps.push_back(std::move(q));
    }
    std::vector<double> shift(n, 0.0);
    for (NodeId v = 0; v < n; ++v) shift[v] = -std::log(1.0 - rng.uniform()) / beta;
    std::vector<std::pair<NodeId, NodeId>> assign;  // (node, center) for this color
    for (auto& cnodes : comps) {
      // Hop distances inside the uncolored power graph.
      auto bfs = [&](const std::vector<NodeId>& src) {
        std::vector<std::uint32_t> dist(n, kUnreached);
        std::deque<NodeId> q;
        for (NodeId s : src) dist[s] = 0, q.push_back(s);
        while (!q.empty()) {
          NodeId v = q.front();
          q.pop_front();
          for (NodeId u : P[v])
            if (d.cluster[u] == kNone32 && dist[u] == kUnreached) dist[u] = dist[v] + 1, q.push_back(u);
        }
        return dist;
      };
      auto d0 = bfs({cnodes.front()});
      std::uint32_t ecc = 0;
      for (NodeId v : cnodes) ecc = std::max(ecc, d0[v]);
      if (ecc <= R) {
        for (NodeId v : cnodes) assign.push_back({v, cnodes.front()});
        continue;
      }
      // Each node joins the center maximizing shift - distance.
      using Item = std::tuple<double, NodeId, NodeId>;  // (dist - shift, center, node)
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      std::vector<double> best(n, std::numeric_limits<double>::infinity());
      std::vector<NodeId> ctr(n, kNoNode);
      for (NodeId v : cnodes) pq.push({-shift[v], v, v});
      while (!pq.empty()) {
        auto [key, c, v] = pq.top();
        pq.pop();
        if (ctr[v] != kNoNode) continue;
        ctr[v] = c;
        best[v] = key;
        for (NodeId u : P[v])
          if (d.cluster[u] == kNone32 && ctr[u] == kNoNode) pq.push({key + 1.0, c, u});
      }
      for (NodeId v : cnodes) {
        bool interior = true;
        for (NodeId u : P[v])
          if (d.cluster[u] == kNone32 && ctr[u] != ctr[v]) interior = false;
        if (interior) assign.push_back({v, ctr[v]});
      }
    }
    std::map<NodeId, std::uint32_t> idx;
    for (auto [v, c] : assign) {
      auto it = idx.find(c);
      if (it == idx.end()) {
        it = idx.emplace(c, static_cast<std::uint32_t>(d.center.size())).first;
        d.center.push_back(c);
        d.color.push_back(color);
      }
      d.cluster[v] = it->second;
      --left;
    }
    d.colors = color + 1;
  }
  d.rounds = static_cast<std::uint64_t>(d.colors) * (2ull * R * power + 1);
  return d;
}

NetworkDecomposition network_decomposition(Network& net, std::uint32_t power, double c_chi, double beta) {
  auto d = network_decomposition(net.graph(), power, net.seed(), c_chi, beta);
  net.local_rounds(d.rounds);
  return d;
}

DecompositionCheck verify_decomposition(const Graph& g, const NetworkDecomposition& d) {
  DecompositionCheck c;
  const std::size_t n = g.n();
  c.colors_ok = d.colors <= d.chi;
  for (NodeId v = 0; v < n; ++v) {
    if (d.cluster[v] == kNone32) {
      c.separated = false;
      continue;
    }
    auto hops = bfs_hops(g, v, std::max(d.diameter_bound, 2 * d.power + 2));
    for (NodeId u = 0; u < n; ++u) {
      if (u == v || d.cluster[u] == kNone32) continue;
      if (d.cluster[u] == d.cluster[v]) {
        std::uint32_t h = hops[u] == kUnreached ? std::numeric_limits<std::uint32_t>::max() : hops[u];
        c.max_weak_diameter = std::max(c.max_weak_diameter, h);
      } else if (d.color[d.cluster[u]] == d.color[d.cluster[v]] && hops[u] != kUnreached) {
        c.min_same_color_gap = std::min(c.min_same_color_gap, hops[u]);
      }
    }
  }
  c.diameter_ok = c.max_weak_diameter <= d.diameter_bound;
  if (c.min_same_color_gap <= d.power) c.separated = false;
  return c;
}

// ------------------------------------------------------------------ Eulerian orientation

std::vector<char> even_subgraph(const Graph& g, std::uint64_t seed) {
  const std::size_t n = g.n();
  std::vector<char> flags(g.m(), 0);
  std::vector<NodeId> par(n, kNoNode);
  std::vector<std::uint32_t> pe(n, kNone32), depth(n, 0);
  std::vector<char> seen(n, 0), tree(g.m(), 0);
  for (NodeId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::deque<NodeId> q{s};
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop_front();
      for (const auto& a : g.adj(v))
        if (!seen[a.to]) {
          seen[a.to] = 1;
          par[a.to] = v;
          pe[a.to] = a.edge;
          depth[a.to] = depth[v] + 1;
          tree[a.edge] = 1;
          q.push_back(a.to);
        }
    }
  }
  Rng rng(seed, 0xe7e);
  for (std::uint32_t e = 0; e < g.m(); ++e) {
    if (tree[e] || !rng.bernoulli(0.5)) continue;
    flags[e] ^= 1;
    NodeId a = g.edge(e).u, b = g.edge(e).v;
    while (a != b) {
      if (depth[a] < depth[b]) std::swap(a, b);
      flags[pe[a]] ^= 1;
      a = par[a];
    }
  }
  return flags;
}

void flip_parity(const Graph& g, std::vector<char>& flags, const std::vector<NodeId>& nodes) {
  if (nodes.size() % 2) throw ConfigError("parity flips come in pairs");
  for (std::size_t i = 0; i < nodes.size(); i += 2) {
    NodeId s = nodes[i], t = nodes[i + 1];
    std::vector<std::uint32_t> pe(g.n(), kNone32);
    std::vector<char> seen(g.n(), 0);
    std::deque<NodeId> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop_front();
      for (const auto& a : g.adj(v))
        if (!seen[a.to]) seen[a.to] = 1, pe[a.to] = a.edge, q.push_back(a.to);
    }
    if (!seen[t]) throw ConfigError("parity flip between disconnected nodes");
    for (NodeId v = t; v != s;) {
      std::uint32_t e = pe[v];
      flags[e] ^= 1;
      v = g.edge(e).u == v ? g.edge(e).v : g.edge(e).u;
    }
  }
}

EulerResult eulerian_orientation(Network& net, const std::vector<char>& edge_in_h, const VirtualNodeSet& virtuals) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  if (edge_in_h.size() != g.m()) throw ConfigError("edge flags do not match the graph");
  if (static_cast<double>(virtuals.count) > VirtualNodeSet::bound(n))
    throw ConfigError("too many virtual nodes: " + std::to_string(virtuals.count));
  std::uint64_t start = net.rounds();
  EulerResult r;
  Multigraph& h = r.h;
  h.n = n + virtuals.count;
  for (std::uint32_t e = 0; e < g.m(); ++e)
    if (edge_in_h[e]) h.add(g.edge(e).u, g.edge(e).v, e);
  std::size_t real_edges = h.edges.size();
  for (auto [x, v] : virtuals.real_edges) {
    if (x >= virtuals.count || v >= n) throw ConfigError("virtual edge endpoint out of range");
    h.add(static_cast<NodeId>(n + x), v);
  }
  for (auto [a, b] : virtuals.virtual_edges) {
    if (a >= virtuals.count || b >= virtuals.count) throw ConfigError("virtual edge endpoint out of range");
    if (a == b) throw ConfigError("virtual self-loops are not allowed");
    h.add(static_cast<NodeId>(n + a), static_cast<NodeId>(n + b));
  }
  auto deg = h.degrees();
  for (NodeId v = 0; v < h.n; ++v)
    if (deg[v] % 2) {
      std::string who = v < n ? "node " + std::to_string(g.id(v)) : "virtual node " + std::to_string(v - n);
      throw ConfigError(who + " has odd degree " + std::to_string(deg[v]));
    }

  std::vector<int> dir(h.edges.size(), -1);  // 1: u -> v, 0: v -> u
  r.decomposition = network_decomposition(net, 2);
  const auto& nd = r.decomposition;

  std::vector<std::vector<std::uint32_t>> inc(h.n);
  for (std::uint32_t i = 0; i < h.edges.size(); ++i) {
    inc[h.edges[i].u].push_back(i);
    inc[h.edges[i].v].push_back(i);
  }
  for (std::uint32_t color = 0; color < nd.colors; ++color) {
    // Every cluster of this color takes the unoriented real edges touching it
    // and peels cycles off them until a forest is left.
    std::map<std::uint32_t, std::vector<std::uint32_t>> work;
    for (std::uint32_t i = 0; i < real_edges; ++i) {
      if (dir[i] != -1) continue;
      for (NodeId x : {h.edges[i].u, h.edges[i].v}) {
        std::uint32_t c = nd.cluster[x];
        if (nd.color[c] == color) {
          work[c].push_back(i);
          break;
        }
      }
    }
    std::size_t removed = 0;
    bool forest_ok = true;
    for (auto& [c, es] : work) {
      std::vector<char> gone(es.size(), 0);
      for (;;) {
        // First edge closing a cycle among the remaining ones.
        std::map<NodeId, std::vector<std::pair<NodeId, std::size_t>>> adj;
        std::map<NodeId, NodeId> parent;
        auto root = [&](NodeId x) {
          while (parent.count(x) && parent[x] != x) x = parent[x];
          return x;
        };
        std::size_t closing = es.size();
        for (std::size_t j = 0; j < es.size() && closing == es.size(); ++j) {
          if (gone[j]) continue;
          NodeId a = h.edges[es[j]].u, b = h.edges[es[j]].v;
          if (!parent.count(a)) parent[a] = a;
          if (!parent.count(b)) parent[b] = b;
          NodeId ra = root(a), rb = root(b);
          if (ra == rb) {
            closing = j;
            break;
          }
          parent[ra] = rb;
          adj[a].push_back({b, j});
          adj[b].push_back({a, j});
        }
        if (closing == es.size()) break;
        // Path between the endpoints inside the forest, then the closing edge.
        NodeId a = h.edges[es[closing]].u, b = h.edges[es[closing]].v;
        std::map<NodeId, std::pair<NodeId, std::size_t>> from;
        std::deque<NodeId> q{b};
        from[b] = {b, es.size()};
        while (!q.empty() && !from.count(a)) {
          NodeId v = q.front();
          q.pop_front();
          for (auto [u, j] : adj[v])
            if (!from.count(u)) from[u] = {v, j}, q.push_back(u);
        }
        // Walk a -> ... -> b along the tree, then b -> a over the closing edge.
        for (NodeId v = a; v != b;) {
          auto [p, j] = from[v];
          dir[es[j]] = h.edges[es[j]].u == v ? 1 : 0;
          gone[j] = 1;
          ++removed;
          v = p;
        }
        dir[es[closing]] = h.edges[es[closing]].u == b ? 1 : 0;
        gone[closing] = 1;
        ++removed;
      }
      Dsu left_over(h.n);
      for (std::size_t j = 0; j < es.size(); ++j)
        if (!gone[j] && !left_over.unite(h.edges[es[j]].u, h.edges[es[j]].v)) forest_ok = false;
    }
    r.removed_per_class.push_back(removed);
    r.class_forest_ok.push_back(forest_ok);
    net.local_rounds(2ull * nd.diameter_bound + 2);
    std::vector<std::uint32_t> rest(h.n, 0);
    for (std::uint32_t i = 0; i < h.edges.size(); ++i)
      if (dir[i] == -1) ++rest[h.edges[i].u], ++rest[h.edges[i].v];
    for (auto x : rest)
      if (x % 2) r.even_after_each_class = false;
  }

  // Residual: split every virtual node into degree-2 nodes by pairing its
  // neighbors in ascending id order; the residual virtual node keeps nothing
  // since all degrees are even.
  std::vector<std::uint32_t> res;
  for (std::uint32_t i = 0; i < h.edges.size(); ++i)
    if (dir[i] == -1) res.push_back(i);
  r.residual_edges = res.size();
  auto label = [&](NodeId v) -> Ident { return v < n ? g.id(v) : std::numeric_limits<Ident>::max() / 2 + v; };
  // Pair the residual edges at every node (real and virtual alike).
  std::vector<std::vector<std::uint32_t>> rinc(h.n);
  for (std::uint32_t j = 0; j < res.size(); ++j) {
    const auto& e = h.edges[res[j]];
    rinc[e.u].push_back(j);
    rinc[e.v].push_back(j);
  }
  Multigraph R;  // residual with virtual nodes split, for the forest certificate
  Multigraph H2;
  std::vector<std::array<NodeId, 2>> side(res.size(), {kNoNode, kNoNode});  // pair node at (u side, v side)
  std::vector<std::array<NodeId, 2>> rside(res.size(), {kNoNode, kNoNode});
  R.n = n;
  for (NodeId v = 0; v < h.n; ++v) {
    auto& list = rinc[v];
    auto far = [&](std::uint32_t j) {
      const auto& e = h.edges[res[j]];
      return e.u == v ? e.v : e.u;
    };
    std::stable_sort(list.begin(), list.end(), [&](std::uint32_t x, std::uint32_t y) {
      Ident lx = label(far(x)), ly = label(far(y));
      return lx != ly ? lx < ly : x < y;
    });
    for (std::size_t k = 0; k + 1 < list.size(); k += 2) {
      NodeId p = static_cast<NodeId>(H2.n++);
      NodeId rv = v;
      if (v >= n) {
        rv = static_cast<NodeId>(R.n++);
        ++r.split_nodes;
      }
      for (std::size_t t = k; t < k + 2; ++t) {
        std::uint32_t j = list[t];
        const auto& e = h.edges[res[j]];
        int s = e.u == v ? 0 : 1;
        side[j][s] = p;
        rside[j][s] = rv;
      }
    }
  }
  for (std::uint32_t j = 0; j < res.size(); ++j) {
    R.edges.push_back({rside[j][0], rside[j][1], h.edges[res[j]].gedge});
    H2.edges.push_back({side[j][0], side[j][1], h.edges[res[j]].gedge});
  }
  r.residual_forests = forest_decomposition(R, nd.chi + 1);
  net.local_rounds(r.residual_forests.iterations);
  if (!H2.edges.empty()) {
    r.cycles = orient_cycles(H2, &net);
    for (std::uint32_t j = 0; j < res.size(); ++j) dir[res[j]] = r.cycles.orientation.forward[j] ? 1 : 0;
  }
  std::vector<char> forward(h.edges.size(), 1);
  for (std::uint32_t i = 0; i < h.edges.size(); ++i) forward[i] = dir[i] == 1;
  r.orientation = Orientation::make(h, std::move(forward));
  r.rounds = net.rounds() - start;
  return r;
}

}  // namespace hyb
