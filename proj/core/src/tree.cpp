#include "hybrid/tree.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace hyb {

// ---------------------------------------------------------------- structure

std::size_t VirtualTree::size() const {
  return static_cast<std::size_t>(std::count(member.begin(), member.end(), 1));
}

std::vector<NodeId> VirtualTree::members() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v)
    if (member[v]) out.push_back(v);
  return out;
}

std::uint32_t VirtualTree::max_children() const {
  std::size_t mx = 0;
  for (const auto& c : children) mx = std::max(mx, c.size());
  return static_cast<std::uint32_t>(mx);
}

std::uint32_t VirtualTree::max_degree() const {
  std::uint32_t mx = 0;
  for (NodeId v = 0; v < n; ++v)
    if (member[v])
      mx = std::max<std::uint32_t>(mx, static_cast<std::uint32_t>(children[v].size()) +
                                           (parent[v] != kNoNode ? 1 : 0));
  return mx;
}

std::uint32_t VirtualTree::child_index(NodeId v) const {
  NodeId p = parent[v];
  if (p == kNoNode) return 0;
  const auto& c = children[p];
  return static_cast<std::uint32_t>(std::find(c.begin(), c.end(), v) - c.begin());
}

VirtualTree VirtualTree::from_parents(const Graph& g, std::vector<char> member, std::vector<NodeId> parent) {
  VirtualTree t;
  t.n = g.n();
  t.member = std::move(member);
  t.parent = std::move(parent);
  t.children.assign(t.n, {});
  t.level.assign(t.n, 0);
  for (NodeId v = 0; v < t.n; ++v) {
    if (!t.member[v]) {
      t.parent[v] = kNoNode;
      continue;
    }
    if (t.parent[v] == kNoNode) t.roots.push_back(v);
    else t.children[t.parent[v]].push_back(v);
  }
  for (auto& c : t.children)
    std::sort(c.begin(), c.end(), [&](NodeId a, NodeId b) { return g.id(a) < g.id(b); });
  std::sort(t.roots.begin(), t.roots.end(), [&](NodeId a, NodeId b) { return g.id(a) > g.id(b); });
  std::vector<NodeId> stack(t.roots.begin(), t.roots.end());
  std::size_t seen = 0;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    ++seen;
    for (NodeId c : t.children[v]) {
      t.level[c] = t.level[v] + 1;
      t.depth = std::max(t.depth, t.level[c]);
      stack.push_back(c);
    }
  }
  if (seen != t.size()) throw std::logic_error("parent pointers contain a cycle");
  t.degree_bound = t.max_degree();
  return t;
}

void VirtualTree::certify() const {
  std::size_t reached = 0;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack(roots.begin(), roots.end());
  for (NodeId r : roots)
    if (!member[r] || parent[r] != kNoNode) throw std::logic_error("invalid root");
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (seen[v]) throw std::logic_error("node reached twice");
    seen[v] = 1;
    ++reached;
    for (NodeId c : children[v]) {
      if (!member[c] || parent[c] != v) throw std::logic_error("child/parent mismatch");
      if (level[c] != level[v] + 1 || level[c] > depth) throw std::logic_error("bad level");
      stack.push_back(c);
    }
  }
  if (reached != size()) throw std::logic_error("tree does not span its members");
  if (max_degree() > degree_bound) throw std::logic_error("degree bound exceeded");
}

std::string VirtualTree::to_json(const Graph& g) const {
  nlohmann::json j;
  j["depth"] = depth;
  j["degree_bound"] = degree_bound;
  j["max_degree"] = max_degree();
  auto& r = j["roots"] = nlohmann::json::array();
  for (NodeId v : roots) r.push_back(g.id(v));
  auto& e = j["edges"] = nlohmann::json::array();
  for (NodeId v = 0; v < n; ++v)
    if (member[v] && parent[v] != kNoNode) e.push_back({g.id(parent[v]), g.id(v)});
  return j.dump();
}

// -------------------------------------------------------------- aggregation

std::uint64_t fold(AggOp op, std::uint64_t a, std::uint64_t b) {
  switch (op) {
    case AggOp::Min: return std::min(a, b);
    case AggOp::Max: return std::max(a, b);
    case AggOp::Sum32: return (a + b) & 0xFFFFFFFFULL;
  }
  return a;
}

AggFn agg_fn(AggOp op) {
  AggFn f;
  f.combine = [op](const AggVal& a, const AggVal& b) { return AggVal{fold(op, a[0], b[0]), 0}; };
  return f;
}

namespace {

Message encode(const AggFn& fn, const AggVal& v, std::uint32_t tag) {
  Message m;
  m.tag = tag;
  for (std::uint8_t i = 0; i < fn.words; ++i) {
    if (i == 0 && fn.first_is_id) m.ident(v[0]);
    else m.word(v[i]);
  }
  return m;
}

AggVal decode(const AggFn& fn, const Message& m) {
  AggVal v{0, 0};
  std::uint8_t wi = 0;
  for (std::uint8_t i = 0; i < fn.words; ++i) {
    if (i == 0 && fn.first_is_id) v[0] = m.id[0];
    else v[i] = m.w[wi++];
  }
  return v;
}

std::vector<std::uint32_t> heights(const VirtualTree& t) {
  std::vector<std::uint32_t> h(t.n, 0);
  std::vector<NodeId> order;
  for (NodeId v = 0; v < t.n; ++v)
    if (t.member[v]) order.push_back(v);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return t.level[a] > t.level[b]; });
  for (NodeId v : order)
    if (t.parent[v] != kNoNode) h[t.parent[v]] = std::max(h[t.parent[v]], h[v] + 1);
  return h;
}

constexpr std::uint32_t kTagAggUp = 1;
constexpr std::uint32_t kTagAggDown = 2;

}  // namespace

std::uint64_t aggregate_rounds(const Network& net, const VirtualTree& tree) {
  std::uint32_t c = std::max(1u, tree.max_children());
  return 2ULL * tree.depth * net.exchange_rounds(1, c);
}

std::vector<AggVal> aggregate_broadcast(Network& net, const VirtualTree& tree, std::vector<AggVal> values,
                                        const AggFn& fn) {
  if (tree.depth == 0) return values;
  auto h = heights(tree);
  std::uint32_t maxc = std::max(1u, tree.max_children());
  std::vector<AggVal> acc = values;
  // Up: a node of height s-1 has heard from all children by step s.
  for (std::uint32_t s = 1; s <= tree.depth; ++s) {
    std::vector<PortedEnvelope> out;
    for (NodeId v = 0; v < tree.n; ++v)
      if (tree.member[v] && tree.parent[v] != kNoNode && h[v] == s - 1)
        out.push_back({v, tree.parent[v], 0, tree.child_index(v), encode(fn, acc[v], kTagAggUp)});
    auto d = net.exchange(std::move(out), 1, maxc);
    for (const auto& e : d.all()) acc[e.to] = fn.combine(acc[e.to], decode(fn, e.msg));
  }
  // Down: level by level.
  std::vector<AggVal> res = values;
  for (NodeId r : tree.roots) res[r] = acc[r];
  for (std::uint32_t s = 1; s <= tree.depth; ++s) {
    std::vector<PortedEnvelope> out;
    for (NodeId v = 0; v < tree.n; ++v)
      if (tree.member[v] && tree.level[v] == s - 1)
        for (std::uint32_t i = 0; i < tree.children[v].size(); ++i)
          out.push_back({v, tree.children[v][i], i, 0, encode(fn, res[v], kTagAggDown)});
    auto d = net.exchange(std::move(out), maxc, 1);
    for (const auto& e : d.all()) res[e.to] = decode(fn, e.msg);
  }
  return res;
}

std::vector<std::uint64_t> tree_aggregate_broadcast(Network& net, const VirtualTree& tree,
                                                    const std::vector<std::uint64_t>& values, AggOp op) {
  std::vector<AggVal> in(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (bitwidth(values[i]) > net.msg_bits())
      throw ProtocolError("aggregation value does not fit one message");
    in[i] = {values[i], 0};
  }
  auto out = aggregate_broadcast(net, tree, std::move(in), agg_fn(op));
  std::vector<std::uint64_t> res(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) res[i] = out[i][0];
  return res;
}

std::vector<std::uint32_t> rank_members(Network& net, const VirtualTree& tree) {
  std::vector<std::uint32_t> rank(tree.n, kNoNode);
  auto h = heights(tree);
  std::uint32_t maxc = std::max(1u, tree.max_children());
  std::vector<std::uint64_t> sub(tree.n, 0);
  for (NodeId v = 0; v < tree.n; ++v) sub[v] = tree.member[v] ? 1 : 0;
  for (std::uint32_t s = 1; s <= tree.depth; ++s) {
    std::vector<PortedEnvelope> out;
    for (NodeId v = 0; v < tree.n; ++v)
      if (tree.member[v] && tree.parent[v] != kNoNode && h[v] == s - 1)
        out.push_back({v, tree.parent[v], 0, tree.child_index(v), Message(kTagAggUp, {sub[v]})});
    auto d = net.exchange(std::move(out), 1, maxc);
    for (const auto& e : d.all()) sub[e.to] += e.msg.w[0];
  }
  // Roots of a forest are numbered consecutively in root order.
  std::uint64_t base = 0;
  for (NodeId r : tree.roots) {
    rank[r] = static_cast<std::uint32_t>(base);
    base += sub[r];
  }
  for (std::uint32_t s = 1; s <= tree.depth; ++s) {
    std::vector<PortedEnvelope> out;
    for (NodeId v = 0; v < tree.n; ++v)
      if (tree.member[v] && tree.level[v] == s - 1) {
        std::uint64_t next = rank[v] + 1ULL;
        for (std::uint32_t i = 0; i < tree.children[v].size(); ++i) {
          NodeId c = tree.children[v][i];
          out.push_back({v, c, i, 0, Message(kTagAggDown, {next})});
          next += sub[c];
        }
      }
    auto d = net.exchange(std::move(out), maxc, 1);
    for (const auto& e : d.all()) rank[e.to] = static_cast<std::uint32_t>(e.msg.w[0]);
  }
  return rank;
}

// ------------------------------------------------------------ HYBRID trees

namespace {

VirtualTree heap_tree(const Network& net) {
  const Graph& g = net.graph();
  std::vector<NodeId> order(g.n());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return g.id(a) < g.id(b); });
  std::vector<NodeId> parent(g.n(), kNoNode);
  for (std::size_t i = 1; i < order.size(); ++i) parent[order[i]] = order[(i - 1) / 2];
  auto t = VirtualTree::from_parents(g, std::vector<char>(g.n(), 1), std::move(parent));
  t.degree_bound = 3;
  return t;
}

// Tags for the HYBRID0 construction. Low byte is the kind; flag bits above it
// are part of the constant-size header.
enum : std::uint32_t {
  kQuery = 16,
  kReply = 17,
  kBack = 18,
  kChild = 19,
  kJoin = 20,
};

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Arc element e = 2*node + slot; slot 0 = arc into the node from its parent,
// slot 1 = arc from the node up to its parent. Both live at the node.
inline NodeId host(std::uint32_t e) { return e >> 1; }
inline std::uint32_t slot(std::uint32_t e) { return e & 1u; }

class ForestBuilder {
 public:
  ForestBuilder(Network& net, const std::function<bool(std::uint32_t)>& keep)
      : net_(net), g_(net.graph()), keep_(keep), n_(g_.n()) {}

  VirtualTree run();

 private:
  void init();
  void phase();
  std::vector<AggVal> agg(const std::vector<AggVal>& vals, const AggFn& fn) {
    return aggregate_broadcast(net_, vt_, vals, fn);
  }
  void rebuild_overlay();

  Network& net_;
  const Graph& g_;
  const std::function<bool(std::uint32_t)>& keep_;
  std::size_t n_;
  std::uint32_t L_ = 1;

  std::vector<Ident> comp_;                    // leader id = root id
  std::vector<NodeId> spar_;                   // spanning-tree parent (graph edge)
  std::vector<std::vector<NodeId>> schild_;    // sorted by id
  std::vector<std::uint64_t> csize_;           // component size known at the node
  std::vector<std::uint64_t> rank_;            // per element, distance to the end of the tour
  VirtualTree vt_;
};

void ForestBuilder::init() {
  L_ = ceil_log2(2 * n_) + 1;
  comp_.resize(n_);
  for (NodeId v = 0; v < n_; ++v) comp_[v] = g_.id(v);
  spar_.assign(n_, kNoNode);
  schild_.assign(n_, {});
  csize_.assign(n_, 1);
  rank_.assign(2 * n_, 0);
  vt_ = VirtualTree::from_parents(g_, std::vector<char>(n_, 1), std::vector<NodeId>(n_, kNoNode));
}

VirtualTree ForestBuilder::run() {
  init();
  std::uint32_t phases = log_n(n_);
  for (std::uint32_t p = 0; p < phases; ++p) phase();
  vt_.degree_bound = 7;
  vt_.certify();
  return vt_;
}

void ForestBuilder::phase() {
  const std::size_t n = n_;
  // 1. Neighbors swap component ids over kept edges.
  std::vector<Ident> cand(n, 0);
  std::vector<char> has(n, 0);
  for (NodeId v = 0; v < n; ++v)
    for (const auto& a : g_.adj(v)) {
      if (!keep_(a.edge)) continue;
      net_.learn(v, comp_[a.to]);
      if (comp_[a.to] != comp_[v] && (!has[v] || comp_[a.to] > cand[v])) {
        cand[v] = comp_[a.to];
        has[v] = 1;
      }
    }
  net_.local_rounds(1, 2 * g_.m());

  // 2. Each component picks the neighboring component with the largest leader.
  AggFn maxf = agg_fn(AggOp::Max);
  std::vector<AggVal> in(n);
  for (NodeId v = 0; v < n; ++v) in[v] = {has[v] ? cand[v] + 1 : 0, 0};
  auto tgt = agg(in, maxf);
  std::vector<std::uint64_t> target(n);
  for (NodeId v = 0; v < n; ++v) target[v] = tgt[v][0];  // leader + 1, 0 = none

  // 3. Neighbors swap targets; nodes touching the target learn whether the
  // choice is mutual. The smallest such id becomes the hooking node.
  net_.local_rounds(1, 2 * g_.m());
  AggFn hookf;
  hookf.words = 2;
  hookf.first_is_id = true;
  hookf.combine = [](const AggVal& a, const AggVal& b) {
    bool ea = a[1] < 2, eb = b[1] < 2;
    if (ea != eb) return ea ? a : b;
    return a[0] <= b[0] ? a : b;
  };
  std::vector<NodeId> hook_to(n, kNoNode);
  for (NodeId v = 0; v < n; ++v) {
    in[v] = {g_.id(v), 2};
    if (target[v] == 0) continue;
    Ident t = target[v] - 1;
    for (const auto& a : g_.adj(v)) {
      if (!keep_(a.edge) || comp_[a.to] != t) continue;
      if (hook_to[v] == kNoNode || g_.id(a.to) < g_.id(hook_to[v])) hook_to[v] = a.to;
      in[v] = {g_.id(v), target[a.to] == comp_[v] + 1 ? 1u : 0u};
    }
  }
  auto hk = agg(in, hookf);

  // 4. The hooking node publishes the tour index of its up arc.
  std::vector<char> hooks(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    if (target[v] == 0 || hk[v][1] >= 2) continue;
    bool mutual = hk[v][1] == 1;
    hooks[v] = !(mutual && comp_[v] > target[v] - 1);
  }
  for (NodeId v = 0; v < n; ++v) {
    bool is_b = hooks[v] && hk[v][0] == g_.id(v);
    in[v] = {is_b && spar_[v] != kNoNode ? (csize_[v] * 2 - 2 - 1 - rank_[2 * v + 1]) + 1 : 0, 0};
  }
  auto st = agg(in, maxf);

  // 5. Reroot hooking components at their hooking node and attach it.
  std::vector<NodeId> npar(n, kNoNode);
  std::vector<char> flipped(n, 0);
  std::uint64_t notes = 0;
  for (NodeId u = 0; u < n; ++u) {
    NodeId p = spar_[u];
    if (p == kNoNode) continue;
    bool flip = false;
    if (hooks[u] && st[u][0] != 0) {
      std::uint64_t M = 2 * csize_[u] - 2, start = st[u][0] - 1;
      std::uint64_t idown = M - 1 - rank_[2 * u], iup = M - 1 - rank_[2 * u + 1];
      flip = (idown + M - start) % M > (iup + M - start) % M;
    }
    if (flip) {
      npar[p] = u;
      flipped[u] = 1;
      ++notes;
    } else {
      npar[u] = p;
    }
  }
  for (NodeId v = 0; v < n; ++v)
    if (hooks[v] && hk[v][0] == g_.id(v)) {
      npar[v] = hook_to[v];
      ++notes;
    }
  net_.local_rounds(1, notes);
  spar_ = npar;
  for (auto& c : schild_) c.clear();
  for (NodeId v = 0; v < n; ++v)
    if (spar_[v] != kNoNode) schild_[spar_[v]].push_back(v);
  for (auto& c : schild_) std::sort(c.begin(), c.end(), [&](NodeId a, NodeId b) { return g_.id(a) < g_.id(b); });

  rebuild_overlay();
}

void ForestBuilder::rebuild_overlay() {
  const std::size_t n = n_;
  const std::size_t E = 2 * n;
  // Successor of every arc, computed by the arc's head node and handed to the
  // host over a graph edge.
  std::vector<std::uint32_t> nxt(E, kNone);
  for (NodeId u = 0; u < n; ++u) {
    const auto& ch = schild_[u];
    if (spar_[u] != kNoNode) nxt[2 * u] = ch.empty() ? 2 * u + 1 : 2 * ch[0];
    for (std::size_t i = 0; i < ch.size(); ++i) {
      std::uint32_t e = 2 * ch[i] + 1;
      if (i + 1 < ch.size()) {
        nxt[e] = 2 * ch[i + 1];
        net_.learn(ch[i], g_.id(ch[i + 1]));
      } else if (spar_[u] != kNoNode) {
        nxt[e] = 2 * u + 1;
      }
    }
  }
  net_.local_rounds(1, n);
  std::vector<char> exists(E, 0);
  for (NodeId u = 0; u < n; ++u)
    if (spar_[u] != kNoNode) exists[2 * u] = exists[2 * u + 1] = 1;

  // List ranking by pointer jumping. fwd[j][e] is the element 2^j ahead.
  std::vector<std::uint64_t> rank(E, 0);
  for (std::uint32_t e = 0; e < E; ++e)
    if (exists[e] && nxt[e] != kNone) rank[e] = 1;
  std::vector<std::vector<std::uint32_t>> fwd(L_, std::vector<std::uint32_t>(E, kNone));
  std::vector<std::vector<std::uint32_t>> bwd(L_, std::vector<std::uint32_t>(E, kNone));
  for (std::uint32_t j = 0; j < L_; ++j) {
    fwd[j] = nxt;
    std::vector<PortedEnvelope> q;
    for (std::uint32_t e = 0; e < E; ++e)
      if (exists[e] && nxt[e] != kNone)
        q.push_back({host(e), host(nxt[e]), slot(e), slot(nxt[e]),
                     Message(kQuery | slot(nxt[e]) << 8 | slot(e) << 9, {})});
    auto dq = net_.exchange(std::move(q), 2, 2);
    std::vector<PortedEnvelope> r;
    for (const auto& m : dq.all()) {
      std::uint32_t t = 2 * m.to + ((m.msg.tag >> 8) & 1u);
      std::uint32_t se = (m.msg.tag >> 9) & 1u;
      Message rep;
      rep.tag = kReply | se << 8;
      rep.word(rank[t]);
      if (nxt[t] != kNone) {
        rep.tag |= 1u << 9 | slot(nxt[t]) << 10;
        rep.ident(g_.id(host(nxt[t])));
      }
      r.push_back({m.to, m.from, slot(t), se, rep});
    }
    auto dr = net_.exchange(std::move(r), 2, 2);
    for (const auto& m : dr.all()) {
      std::uint32_t e = 2 * m.to + ((m.msg.tag >> 8) & 1u);
      rank[e] += m.msg.w[0];
      if (m.msg.tag >> 9 & 1u) nxt[e] = 2 * g_.index_of(m.msg.id[0]) + ((m.msg.tag >> 10) & 1u);
      else nxt[e] = kNone;
    }
  }
  for (std::uint32_t e = 0; e < E; ++e)
    if (exists[e] && nxt[e] != kNone) throw std::logic_error("list ranking did not converge");
  rank_ = rank;

  // Backward pointers: tell the element 2^j ahead who is 2^j behind it.
  for (std::uint32_t j = 0; j < L_; ++j) {
    std::vector<PortedEnvelope> b;
    for (std::uint32_t e = 0; e < E; ++e)
      if (exists[e] && fwd[j][e] != kNone)
        b.push_back({host(e), host(fwd[j][e]), slot(e), slot(fwd[j][e]),
                     Message(kBack | slot(fwd[j][e]) << 8 | slot(e) << 9, {})});
    auto d = net_.exchange(std::move(b), 2, 2);
    for (const auto& m : d.all())
      bwd[j][2 * m.to + ((m.msg.tag >> 8) & 1u)] = 2 * m.from + ((m.msg.tag >> 9) & 1u);
  }

  // Binary search tree over positions pos = rank + 1 (truncated in-order).
  std::vector<std::uint32_t> bpar(E, kNone);
  for (std::uint32_t e = 0; e < E; ++e) {
    if (!exists[e]) continue;
    std::uint64_t p = rank[e] + 1;
    std::uint32_t j = static_cast<std::uint32_t>(std::countr_zero(p));
    if (j >= L_) continue;
    bool left = ((p >> (j + 1)) & 1u) == 0;
    if (left && bwd[j][e] != kNone) bpar[e] = bwd[j][e];
    else if (p > (1ULL << j)) bpar[e] = fwd[j][e];
  }
  std::vector<std::array<std::uint32_t, 2>> bch(E, {kNone, kNone});
  {
    std::vector<PortedEnvelope> c;
    for (std::uint32_t e = 0; e < E; ++e) {
      if (!exists[e] || bpar[e] == kNone) continue;
      std::uint32_t side = rank[e] < rank[bpar[e]] ? 1u : 0u;
      c.push_back({host(e), host(bpar[e]), slot(e), slot(bpar[e]) * 2 + side,
                   Message(kChild | slot(bpar[e]) << 8 | slot(e) << 9 | side << 10, {})});
    }
    auto d = net_.exchange(std::move(c), 2, 4);
    for (const auto& m : d.all()) {
      std::uint32_t t = 2 * m.to + ((m.msg.tag >> 8) & 1u);
      bch[t][(m.msg.tag >> 10) & 1u] = 2 * m.from + ((m.msg.tag >> 9) & 1u);
    }
  }

  // Contract the search tree onto hosts and BFS from each spanning-tree root.
  // Port of a link at a host: 3*slot + {0 parent, 1 left, 2 right}; 6 = root link.
  struct Link {
    NodeId to;
    std::uint32_t my_port, their_port;
  };
  std::vector<std::vector<Link>> links(n);
  for (std::uint32_t e = 0; e < E; ++e) {
    if (!exists[e]) continue;
    if (bpar[e] != kNone && host(bpar[e]) != host(e)) {
      std::uint32_t side = rank[e] < rank[bpar[e]] ? 1u : 0u;
      links[host(e)].push_back({host(bpar[e]), 3 * slot(e), 3 * slot(bpar[e]) + 1 + side});
    }
    for (std::uint32_t side = 0; side < 2; ++side) {
      std::uint32_t c = bch[e][side];
      if (c != kNone && host(c) != host(e)) links[host(e)].push_back({host(c), 3 * slot(e) + 1 + side, 3 * slot(c)});
    }
  }
  for (NodeId r = 0; r < n; ++r)
    if (spar_[r] == kNoNode && !schild_[r].empty()) {
      NodeId c1 = schild_[r][0];
      links[r].push_back({c1, 6, 6});
      links[c1].push_back({r, 6, 6});
    }

  std::vector<NodeId> vpar(n, kNoNode);
  std::vector<char> visited(n, 0);
  std::vector<NodeId> frontier;
  std::vector<Ident> leader(n);
  for (NodeId r = 0; r < n; ++r)
    if (spar_[r] == kNoNode) {
      visited[r] = 1;
      leader[r] = g_.id(r);
      frontier.push_back(r);
    }
  // A join sent to the chosen parent doubles as the child registration. The
  // first element can sit at the bottom of the search tree, so the walk may
  // climb L_ levels and descend L_ more.
  std::uint32_t steps = 2 * L_ + 4, used = 0;
  for (; used < steps && !frontier.empty(); ++used) {
    std::vector<PortedEnvelope> out;
    for (NodeId u : frontier)
      for (const auto& l : links[u]) {
        Message m(kJoin | (l.to == vpar[u] ? 1u << 8 : 0u), {}, {leader[u]});
        out.push_back({u, l.to, l.my_port, l.their_port, m});
      }
    auto d = net_.exchange(std::move(out), 7, 7);
    std::vector<NodeId> next;
    for (NodeId v = 0; v < n; ++v) {
      auto in = d.at(v);
      if (in.empty() || visited[v]) continue;
      NodeId best = kNoNode;
      for (const auto& m : in)
        if (best == kNoNode || g_.id(m.from) < g_.id(best)) best = m.from;
      visited[v] = 1;
      vpar[v] = best;
      for (const auto& m : in)
        if (m.from == best) leader[v] = m.msg.id[0];
      next.push_back(v);
    }
    frontier = next;
  }
  for (NodeId v = 0; v < n; ++v)
    if (!visited[v]) throw std::logic_error("overlay BFS did not reach every node");
  // Nodes cannot detect termination early; the remaining steps still elapse.
  for (; used < steps; ++used) net_.exchange({}, 7, 7);

  comp_ = leader;
  vt_ = VirtualTree::from_parents(g_, std::vector<char>(n, 1), vpar);

  AggFn sumf = agg_fn(AggOp::Sum32);
  std::vector<AggVal> ones(n, AggVal{1, 0});
  auto sz = agg(ones, sumf);
  for (NodeId v = 0; v < n; ++v) csize_[v] = sz[v][0];
}

}  // namespace

VirtualTree build_component_forest(Network& net, const std::function<bool(std::uint32_t)>& keep_edge) {
  ForestBuilder b(net, keep_edge);
  return b.run();
}

VirtualTree build_virtual_tree(Network& net) {
  if (!net.hybrid0()) return heap_tree(net);
  return build_component_forest(net, [](std::uint32_t) { return true; });
}

// ------------------------------------------------------------------ pruning

namespace {
enum : std::uint32_t { kPruneUp = 30, kPruneDown = 31, kPruneTop = 32, kPruneKid = 33, kPruneIdx = 34 };
}

VirtualTree prune_tree(Network& net, const VirtualTree& t, const std::vector<char>& flag) {
  const Graph& g = net.graph();
  const std::size_t n = t.n;
  bool any = false;
  for (NodeId v = 0; v < n; ++v) any |= t.member[v] && flag[v];
  if (!any) throw ConfigError("prune_tree needs at least one flagged member");
  auto h = heights(t);
  std::uint32_t maxc = std::max(1u, t.max_children());

  // 1. Convergecast: does my subtree hold a flag, and which flagged node
  // represents it (first flagged node on the walk down through first children).
  std::vector<char> has(n, 0);
  std::vector<NodeId> rep(n, kNoNode);
  std::vector<std::vector<NodeId>> kid_rep(n);
  for (NodeId v = 0; v < n; ++v) {
    if (!t.member[v]) continue;
    kid_rep[v].assign(t.children[v].size(), kNoNode);
    if (flag[v]) {
      has[v] = 1;
      rep[v] = v;
    }
  }
  for (std::uint32_t s = 1; s <= t.depth; ++s) {
    std::vector<PortedEnvelope> out;
    for (NodeId v = 0; v < n; ++v) {
      if (!t.member[v] || t.parent[v] == kNoNode || h[v] != s - 1) continue;
      // Settle own representative from children (received in earlier steps).
      if (!flag[v])
        for (std::size_t i = 0; i < t.children[v].size(); ++i)
          if (kid_rep[v][i] != kNoNode) {
            has[v] = 1;
            rep[v] = kid_rep[v][i];
            break;
          }
      Message m(kPruneUp | (has[v] ? 1u << 8 : 0u), {});
      if (has[v]) m.ident(g.id(rep[v]));
      out.push_back({v, t.parent[v], 0, t.child_index(v), m});
    }
    auto d = net.exchange(std::move(out), 1, maxc);
    for (const auto& e : d.all())
      if (e.msg.tag >> 8 & 1u) kid_rep[e.to][t.child_index(e.from)] = g.index_of(e.msg.id[0]);
  }
  for (NodeId r : t.roots)
    if (!flag[r])
      for (std::size_t i = 0; i < t.children[r].size(); ++i)
        if (kid_rep[r][i] != kNoNode) {
          has[r] = 1;
          rep[r] = kid_rep[r][i];
          break;
        }

  // 2. Every node tells its children its representative.
  std::vector<NodeId> prep(n, kNoNode);
  {
    std::vector<PortedEnvelope> out;
    for (NodeId v = 0; v < n; ++v)
      if (t.member[v] && has[v])
        for (std::uint32_t i = 0; i < t.children[v].size(); ++i)
          if (has[t.children[v][i]]) out.push_back({v, t.children[v][i], i, 0, Message(kPruneDown, {}, {g.id(rep[v])})});
    auto d = net.exchange(std::move(out), maxc, 1);
    for (const auto& e : d.all()) prep[e.to] = g.index_of(e.msg.id[0]);
  }

  // 3. Chain tops tell their representative who its new parent is.
  std::vector<NodeId> npar(n, kNoNode);
  {
    std::vector<PortedEnvelope> out;
    for (NodeId x = 0; x < n; ++x) {
      if (!t.member[x] || !has[x]) continue;
      bool top = t.parent[x] == kNoNode || prep[x] != rep[x];
      if (!top) continue;
      NodeId np = t.parent[x] == kNoNode ? kNoNode : prep[x];
      if (rep[x] == x) {
        npar[x] = np;
        continue;
      }
      Message m(kPruneTop | (np == kNoNode ? 0u : 1u << 8), {});
      if (np != kNoNode) m.ident(g.id(np));
      out.push_back({x, rep[x], 0, 0, m});
    }
    auto d = net.exchange(std::move(out), 1, 1);
    for (const auto& e : d.all()) npar[e.to] = (e.msg.tag >> 8 & 1u) ? g.index_of(e.msg.id[0]) : kNoNode;
  }

  // 4. Chain members relay their chain-top children to the representative,
  // one depth level per block so each representative hears one relay at a time.
  std::vector<std::vector<NodeId>> nkids(n);
  for (std::uint32_t lvl = 0; lvl <= t.depth; ++lvl) {
    std::vector<PortedEnvelope> out;
    for (NodeId z = 0; z < n; ++z) {
      if (!t.member[z] || !has[z] || t.level[z] != lvl) continue;
      for (std::uint32_t i = 0; i < t.children[z].size(); ++i) {
        NodeId c = t.children[z][i];
        if (!has[c] || rep[c] == rep[z]) continue;
        if (rep[z] == z) nkids[z].push_back(rep[c]);
        else out.push_back({z, rep[z], i, i, Message(kPruneKid, {}, {g.id(rep[c])})});
      }
    }
    auto d = net.exchange(std::move(out), maxc, maxc);
    for (const auto& e : d.all()) nkids[e.to].push_back(g.index_of(e.msg.id[0]));
  }

  std::vector<char> mem(n, 0);
  for (NodeId v = 0; v < n; ++v) mem[v] = t.member[v] && flag[v];
  for (NodeId v = 0; v < n; ++v)
    for (NodeId c : nkids[v])
      if (npar[c] != v) throw std::logic_error("pruning produced inconsistent parent pointers");
  auto out = VirtualTree::from_parents(g, mem, npar);

  // 5. Parents hand out child indices (used for send lanes downstream).
  std::uint32_t mc = std::max(1u, out.max_children());
  {
    std::vector<PortedEnvelope> msgs;
    for (NodeId v = 0; v < n; ++v)
      for (std::uint32_t i = 0; i < out.children[v].size(); ++i)
        msgs.push_back({v, out.children[v][i], i, 0, Message(kPruneIdx, {i})});
    net.exchange(std::move(msgs), mc, 1);
  }
  out.degree_bound = maxc * (t.depth + 1) + 1;
  return out;
}

VirtualTree subset_tree(Network& net, const std::vector<char>& flag) {
  auto t = build_virtual_tree(net);
  return prune_tree(net, t, flag);
}

}  // namespace hyb
