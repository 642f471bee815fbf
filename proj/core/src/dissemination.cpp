#include "hybrid/dissemination.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "hybrid/distances.hpp"

namespace hyb {

namespace {

enum : std::uint32_t { kHand = 40, kRelay = 41, kTok = 42, kVal = 43, kCount = 44, kStart = 45 };

using Bits = std::vector<std::uint64_t>;

void set_bit(Bits& b, std::size_t i) { b[i >> 6] |= 1ull << (i & 63); }

Message token_message(const Token& t) { return Message(kTok, {t.origin, t.seq, t.payload}); }

// Per-cluster token distribution over slots.
using SlotTokens = std::vector<std::vector<std::vector<std::uint32_t>>>;  // [cluster][slot] -> tokens

struct TokenIndex {
  std::map<std::pair<Ident, std::uint32_t>, std::uint32_t> by_id;
  const std::vector<Token>* tokens = nullptr;

  explicit TokenIndex(const std::vector<Token>& ts) : tokens(&ts) {
    for (std::uint32_t i = 0; i < ts.size(); ++i) by_id[{ts[i].origin, ts[i].seq}] = i;
  }
  std::uint32_t decode(const Message& m) const {
    auto it = by_id.find({m.w[0], static_cast<std::uint32_t>(m.w[1])});
    if (it == by_id.end() || (*tokens)[it->second].payload != m.w[2])
      throw ProtocolError("received a token that was never issued");
    return it->second;
  }
};

// Spreads `items` over the first `hosts` entries of `order` in contiguous
// chunks of at most ceil(M/hosts).
std::vector<std::vector<std::uint32_t>> spread(std::vector<std::uint32_t> items, std::size_t size,
                                               std::size_t hosts) {
  std::vector<std::vector<std::uint32_t>> out(size);
  if (hosts == 0 || hosts > size) hosts = size;
  std::sort(items.begin(), items.end());
  const std::size_t per = hosts == 0 ? 0 : ceil_div(items.size(), hosts);
  for (std::size_t i = 0; i < items.size(); ++i) out[i / per].push_back(items[i]);
  return out;
}

// Hosts of a cluster in hosting order: leader first, then the rest by id.
std::vector<NodeId> hosting_order(const Clustering& c, std::size_t i) {
  std::vector<NodeId> order{c.leader[i]};
  for (NodeId v : c.members[i])
    if (v != c.leader[i]) order.push_back(v);
  return order;
}

// Balances the tokens each cluster holds over its slot hosts and splits every
// host's share across the slots it hosts. Returns the largest per-node share.
std::uint64_t balance(const ClusterChain& ch, const std::vector<std::vector<std::uint32_t>>& held,
                      SlotTokens& slots) {
  std::uint64_t worst = 0;
  const auto& cl = ch.clusters;
  for (std::size_t c = 0; c < cl.count(); ++c) {
    auto order = hosting_order(cl, c);
    std::size_t hosts = std::min<std::size_t>(ch.slots, order.size());
    auto share = spread(held[c], order.size(), hosts);
    std::map<NodeId, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (auto& s : slots[c]) s.clear();
    // Slots of each host in ascending slot order.
    std::vector<std::vector<std::uint32_t>> mine(order.size());
    for (std::uint32_t s = 0; s < ch.slots; ++s) mine[pos[ch.host[c][s]]].push_back(s);
    for (std::size_t h = 0; h < order.size(); ++h) {
      worst = std::max<std::uint64_t>(worst, share[h].size());
      if (share[h].empty()) continue;
      if (mine[h].empty()) throw std::logic_error("tokens assigned to a node without slots");
      for (std::size_t j = 0; j < share[h].size(); ++j) slots[c][mine[h][j % mine[h].size()]].push_back(share[h][j]);
    }
  }
  return worst;
}

std::uint32_t per_host(const ClusterChain& ch) {
  std::uint32_t m = 1;
  for (const auto& ls : ch.lslot)
    for (auto x : ls) m = std::max<std::uint32_t>(m, x + 1u);
  return m;
}

// Sends, for r = 0..rounds-1, the r-th item of every active slot to the
// matched slot of the parent cluster (up) or of every child cluster (down).
// deliver(cluster, slot, r, message) receives what arrives.
void slot_transfer(Network& net, const ClusterChain& ch, bool up, std::uint64_t rounds,
                   const std::function<bool(std::uint32_t)>& active,
                   const std::function<std::optional<Message>(std::uint32_t, std::uint32_t, std::uint64_t)>& item,
                   const std::function<void(std::uint32_t, std::uint32_t, std::uint64_t, const Message&)>& deliver) {
  const std::uint32_t ph = per_host(ch);
  const std::uint32_t mc = ch.maxc;
  const std::size_t C = ch.host.size();
  // Slot served by each (node, local slot) pair; lets a receiver decode the
  // slot from its own local slot bit in the header.
  std::map<std::pair<NodeId, std::uint32_t>, std::pair<std::uint32_t, std::uint32_t>> at;
  for (std::uint32_t c = 0; c < C; ++c)
    for (std::uint32_t s = 0; s < ch.slots; ++s) at[{ch.host[c][s], ch.lslot[c][s]}] = {c, s};

  for (std::uint64_t r = 0; r < rounds; ++r) {
    std::vector<PortedEnvelope> out;
    for (std::uint32_t c = 0; c < C; ++c) {
      if (!active(c)) continue;
      for (std::uint32_t s = 0; s < ch.slots; ++s) {
        auto m = item(c, s, r);
        if (!m) continue;
        NodeId from = ch.host[c][s];
        if (up) {
          std::uint32_t p = ch.parent[c];
          Message x = *m;
          x.tag |= static_cast<std::uint32_t>(ch.lslot[p][s]) << 8;
          out.push_back({from, ch.host[p][s], ch.lslot[c][s], ch.lslot[p][s] * mc + ch.kid_index[c], x});
        } else {
          for (std::uint32_t y : ch.kids[c]) {
            Message x = *m;
            x.tag |= static_cast<std::uint32_t>(ch.lslot[y][s]) << 8;
            out.push_back({from, ch.host[y][s], ch.lslot[c][s] * mc + ch.kid_index[y], ch.lslot[y][s], x});
          }
        }
      }
    }
    auto d = up ? net.exchange(std::move(out), ph, ph * mc) : net.exchange(std::move(out), ph * mc, ph);
    for (const auto& e : d.all()) {
      auto [c, s] = at.at({e.to, e.msg.tag >> 8 & 0xffu});
      Message m = e.msg;
      m.tag &= 0xffu;
      deliver(c, s, r, m);
    }
  }
}

// Top-down slot matching: for each level of the slot heap, matched hosts swap
// the ids of their child-slot hosts, then relay each id to the child slot it
// belongs to.
void handshake(Network& net, const ClusterChain& ch) {
  const Graph& g = net.graph();
  const std::uint32_t ph = per_host(ch);
  const std::uint32_t P = ch.maxc + 1;  // partner index: 0 parent, 1 + kid index
  const std::size_t C = ch.host.size();
  const std::uint32_t S = ch.slots;
  auto child_ids = [&](std::uint32_t c, std::uint32_t s) {
    Message m(kHand, {});
    for (std::uint32_t x = 2 * s + 1; x <= 2 * s + 2 && x < S; ++x) m.ident(g.id(ch.host[c][x]));
    return m;
  };
  for (std::uint32_t lo = 0; lo < S; lo = 2 * lo + 1) {
    std::uint32_t hi = std::min(S, 2 * lo + 1);
    if (2 * lo + 1 >= S) break;  // no child slots below this level
    std::vector<PortedEnvelope> a;
    for (std::uint32_t c = 0; c < C; ++c) {
      std::uint32_t p = ch.parent[c];
      if (p == kNone32) continue;
      for (std::uint32_t s = lo; s < hi; ++s) {
        NodeId hp = ch.host[p][s], hc = ch.host[c][s];
        a.push_back({hp, hc, ch.lslot[p][s] * P + 1 + ch.kid_index[c], ch.lslot[c][s] * P, child_ids(p, s)});
        a.push_back({hc, hp, ch.lslot[c][s] * P, ch.lslot[p][s] * P + 1 + ch.kid_index[c], child_ids(c, s)});
      }
    }
    net.exchange(std::move(a), ph * P, ph * P);

    std::vector<PortedEnvelope> b;
    for (std::uint32_t c = 0; c < C; ++c) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> partners;  // (cluster, partner index)
      if (ch.parent[c] != kNone32) partners.push_back({ch.parent[c], 0});
      for (std::uint32_t y : ch.kids[c]) partners.push_back({y, 1 + ch.kid_index[y]});
      for (std::uint32_t s = lo; s < hi; ++s)
        for (std::uint32_t side = 0; side < 2; ++side) {
          std::uint32_t x = 2 * s + 1 + side;
          if (x >= S || ch.host[c][x] == ch.host[c][s]) continue;
          for (auto [y, pi] : partners)
            b.push_back({ch.host[c][s], ch.host[c][x], (ch.lslot[c][s] * 2 + side) * P + pi, ch.lslot[c][x] * P + pi,
                         Message(kRelay, {pi}, {g.id(ch.host[y][x])})});
        }
    }
    net.exchange(std::move(b), ph * 2 * P, ph * P);
  }
  // A host that serves both a slot and its child slot already holds the id.
  for (std::uint32_t c = 0; c < C; ++c) {
    if (ch.parent[c] == kNone32) continue;
    std::uint32_t p = ch.parent[c];
    for (std::uint32_t s = 0; s < S; ++s) {
      NodeId hp = ch.host[p][s], hc = ch.host[c][s];
      if (s > 0) {
        NodeId up_p = ch.host[p][(s - 1) / 2], up_c = ch.host[c][(s - 1) / 2];
        if (up_p == hp) net.learn(hp, g.id(hc));
        if (up_c == hc) net.learn(hc, g.id(hp));
      }
      if (!net.knows(hp, g.id(hc)) || !net.knows(hc, g.id(hp)))
        throw std::logic_error("slot matching left a pair unknown to each other");
    }
  }
}

// Weighted pre-order offsets over a tree: node v reserves [start, start +
// weight[v]) and its children follow in order. Convergecast of subtree sums,
// then a top-down hand-out; both run level by level over global edges.
std::vector<std::uint64_t> weighted_preorder(Network& net, const VirtualTree& t,
                                             const std::vector<std::uint64_t>& weight) {
  const std::size_t n = t.n;
  std::uint32_t mc = std::max(1u, t.max_children());
  std::vector<std::uint32_t> h(n, 0);
  std::vector<std::uint64_t> sub(weight);
  std::vector<std::vector<std::uint64_t>> kid_sum(n);
  for (NodeId v = 0; v < n; ++v)
    if (t.member[v]) kid_sum[v].assign(t.children[v].size(), 0);
  // Heights from the structure each node learns as its children report.
  for (std::uint32_t lvl = t.depth + 1; lvl-- > 0;)
    for (NodeId v = 0; v < n; ++v)
      if (t.member[v] && t.level[v] == lvl && t.parent[v] != kNoNode)
        h[t.parent[v]] = std::max(h[t.parent[v]], h[v] + 1);
  for (std::uint32_t s = 0; s < t.depth; ++s) {
    std::vector<PortedEnvelope> out;
    for (NodeId v = 0; v < n; ++v) {
      if (!t.member[v] || t.parent[v] == kNoNode || h[v] != s) continue;
      out.push_back({v, t.parent[v], 0, t.child_index(v), Message(kCount, {sub[v]})});
    }
    auto d = net.exchange(std::move(out), 1, mc);
    for (const auto& e : d.all()) {
      kid_sum[e.to][t.child_index(e.from)] = e.msg.w[0];
      sub[e.to] += e.msg.w[0];
    }
  }
  std::vector<std::uint64_t> start(n, 0);
  std::uint64_t base = 0;
  for (NodeId r : t.roots) {
    start[r] = base;
    base += sub[r];
  }
  for (std::uint32_t lvl = 0; lvl < t.depth; ++lvl) {
    std::vector<PortedEnvelope> out;
    for (NodeId v = 0; v < n; ++v) {
      if (!t.member[v] || t.level[v] != lvl) continue;
      std::uint64_t off = start[v] + weight[v];
      for (std::uint32_t i = 0; i < t.children[v].size(); ++i) {
        out.push_back({v, t.children[v][i], i, 0, Message(kStart, {off})});
        off += kid_sum[v][i];
      }
    }
    auto d = net.exchange(std::move(out), mc, 1);
    for (const auto& e : d.all()) start[e.to] = e.msg.w[0];
  }
  return start;
}

std::uint64_t total_tokens(Network& net, const VirtualTree& tree, const TokenSet& ts) {
  std::vector<std::uint64_t> cnt(net.n(), 0);
  for (NodeId h : ts.holder) ++cnt[h];
  auto k = tree_aggregate_broadcast(net, tree, cnt, AggOp::Sum32);
  return k[tree.root()];
}

}  // namespace

Placement parse_placement(const std::string& s) {
  if (s == "one_node") return Placement::OneNode;
  if (s == "uniform") return Placement::Uniform;
  throw ConfigError("placement must be one_node or uniform, got '" + s + "'");
}

std::uint32_t max_payload_bits(const Network& net, std::uint64_t k) {
  std::int64_t b = static_cast<std::int64_t>(net.msg_bits()) - net.id_bits() - bitwidth(k);
  if (b < 1) throw ConfigError("global messages leave no room for a token payload");
  return static_cast<std::uint32_t>(std::min<std::int64_t>(b, 63));
}

TokenSet TokenSet::make(const Network& net, std::uint64_t k, Placement p, std::uint64_t seed,
                        std::uint32_t payload_bits, NodeId at) {
  const Graph& g = net.graph();
  if (k < 1) throw ConfigError("k must be >= 1");
  if (at >= g.n()) throw ConfigError("holder out of range");
  TokenSet ts;
  ts.payload_bits = payload_bits == 0 ? max_payload_bits(net, k) : payload_bits;
  if (ts.payload_bits > 63) throw ConfigError("payload wider than 63 bits");
  Rng rng(seed, 0x70c3);
  std::vector<NodeId> perm(g.n());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::vector<std::uint32_t> next(g.n(), 0);
  for (std::uint64_t j = 0; j < k; ++j) {
    NodeId h = p == Placement::OneNode ? at : perm[j % g.n()];
    Token t;
    t.origin = g.id(h);
    t.seq = next[h]++;
    t.payload = rng.below(1ull << ts.payload_bits);
    ts.tokens.push_back(t);
    ts.holder.push_back(h);
  }
  return ts;
}

TokenSet TokenSet::from_file(const Graph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open token file " + path);
  TokenSet ts;
  std::map<NodeId, std::uint32_t> next;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Ident id;
    std::uint64_t payload;
    if (!(ls >> id >> payload)) throw ConfigError("bad token line: " + line);
    if (!g.has_id(id)) throw ConfigError("token holder " + std::to_string(id) + " is not a node");
    NodeId h = g.index_of(id);
    ts.tokens.push_back({id, next[h]++, payload});
    ts.holder.push_back(h);
    ts.payload_bits = std::max<std::uint32_t>(ts.payload_bits, bitwidth(payload));
  }
  return ts;
}

void TokenSet::validate(const Network& net) const {
  const Graph& g = net.graph();
  if (tokens.size() != holder.size()) throw ConfigError("token and holder lists differ in length");
  std::map<std::pair<Ident, std::uint32_t>, int> seen;
  const std::uint64_t room = bitwidth(tokens.size()) + payload_bits + net.id_bits();
  if (room > net.msg_bits())
    throw ConfigError("tokens need " + std::to_string(room) + " bits, messages carry " +
                      std::to_string(net.msg_bits()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (holder[i] >= g.n() || g.id(holder[i]) != t.origin) throw ConfigError("token origin is not its holder");
    if (++seen[{t.origin, t.seq}] > 1) throw ConfigError("duplicate token id");
    if (bitwidth(t.payload) > payload_bits) throw ConfigError("payload wider than declared");
    if (token_message(t).bits(net.id_bits()) > net.msg_bits()) throw ConfigError("token does not fit a message");
  }
}

bool DisseminationResult::complete() const {
  for (const auto& b : known)
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (!(b[i >> 6] >> (i & 63) & 1u)) return false;
  return true;
}

std::vector<Token> DisseminationResult::output(NodeId v) const {
  std::vector<Token> out;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (knows(v, i)) out.push_back(tokens[i]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::uint32_t>> load_balance(Network& net, const std::vector<NodeId>& members,
                                                     const std::vector<std::vector<std::uint32_t>>& held,
                                                     std::uint32_t radius, std::size_t hosts) {
  if (held.size() != members.size()) throw ConfigError("one holding per member required");
  std::vector<std::uint32_t> all;
  for (const auto& h : held) all.insert(all.end(), h.begin(), h.end());
  net.local_rounds(2ull * std::max<std::uint32_t>(radius, 1));
  return spread(std::move(all), members.size(), hosts);
}

ClusterChain build_cluster_chain(Network& net, std::uint64_t k, const NqReport& nq, const VirtualTree& tree) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  ClusterChain ch;
  ch.clusters = cluster_partition(net, k, &nq, &tree);
  net.begin_phase("cluster_chain");
  const Clustering& cl = ch.clusters;
  const std::size_t C = cl.count();

  std::vector<char> flag(n, 0);
  for (NodeId l : cl.leader) flag[l] = 1;
  ch.ctree = prune_tree(net, tree, flag);
  std::vector<std::uint32_t> of(n, kNone32);
  for (std::uint32_t i = 0; i < C; ++i) of[cl.leader[i]] = i;
  ch.parent.assign(C, kNone32);
  ch.kids.assign(C, {});
  ch.kid_index.assign(C, 0);
  ch.depth.assign(C, 0);
  for (std::uint32_t i = 0; i < C; ++i) {
    NodeId l = cl.leader[i];
    if (ch.ctree.parent[l] != kNoNode) ch.parent[i] = of[ch.ctree.parent[l]];
    for (NodeId c : ch.ctree.children[l]) {
      ch.kid_index[of[c]] = static_cast<std::uint32_t>(ch.kids[i].size());
      ch.kids[i].push_back(of[c]);
    }
    ch.depth[i] = ch.ctree.level[l];
  }
  ch.root = of[ch.ctree.root()];

  // Everybody learns the widest fan-out of the cluster tree and the overlay depth.
  std::vector<std::uint64_t> fan(n, 0), lvl(n, 0);
  for (NodeId l : cl.leader) fan[l] = ch.ctree.children[l].size();
  for (NodeId v = 0; v < n; ++v) lvl[v] = tree.level[v];
  ch.maxc = std::max<std::uint32_t>(1, tree_aggregate_broadcast(net, tree, fan, AggOp::Max)[tree.root()]);
  ch.iterations = std::max<std::uint32_t>(1, tree_aggregate_broadcast(net, tree, lvl, AggOp::Max)[tree.root()]);
  ch.radius = std::max<std::uint32_t>(1, cl.radius);
  ch.slots = static_cast<std::uint32_t>(std::max<std::uint64_t>(1, ceil_div(2 * k, nq.value)));

  // Slot i goes to the i-th node of the hosting order; once every member has
  // a slot, the lowest ids take a second one.
  ch.host.assign(C, std::vector<NodeId>(ch.slots));
  ch.lslot.assign(C, std::vector<std::uint8_t>(ch.slots));
  std::vector<std::uint8_t> count(n, 0);
  for (std::uint32_t c = 0; c < C; ++c) {
    auto order = hosting_order(cl, c);
    const auto& sorted = cl.members[c];
    for (std::uint32_t s = 0; s < ch.slots; ++s) {
      NodeId h = s < order.size() ? order[s] : sorted[(s - order.size()) % sorted.size()];
      ch.host[c][s] = h;
      ch.lslot[c][s] = count[h]++;
    }
  }
  // Members gather the cluster locally, so slot hosts know the hosts of
  // their neighbouring slots.
  net.local_rounds(2ull * ch.radius);
  for (std::uint32_t c = 0; c < C; ++c)
    for (std::uint32_t s = 1; s < ch.slots; ++s) {
      NodeId a = ch.host[c][s], b = ch.host[c][(s - 1) / 2];
      net.learn(a, g.id(b));
      net.learn(b, g.id(a));
    }
  handshake(net, ch);
  return ch;
}

DisseminationResult k_disseminate(Network& net, const TokenSet& ts) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  ts.validate(net);
  const std::uint64_t start = net.rounds();
  net.begin_phase("overlay");
  auto tree = build_virtual_tree(net);
  const std::uint64_t k = total_tokens(net, tree, ts);
  if (k < 1 || k > n) throw ConfigError("k_disseminate needs 1 <= k <= n");
  auto nq = nq_distributed(net, k, &tree);
  auto ch = build_cluster_chain(net, k, nq, tree);
  const auto& cl = ch.clusters;
  const std::size_t C = cl.count();
  TokenIndex index(ts.tokens);

  DisseminationResult res;
  res.k = k;
  res.nq = nq.value;
  res.clusters = C;
  res.slots = ch.slots;
  res.iterations = ch.iterations;
  res.tokens = ts.tokens;

  std::vector<std::vector<std::uint32_t>> held(C);
  for (std::uint32_t i = 0; i < ts.tokens.size(); ++i) held[cl.cluster[ts.holder[i]]].push_back(i);
  SlotTokens slots(C, std::vector<std::vector<std::uint32_t>>(ch.slots));

  // Up phase: balance, then every non-root cluster hands all its tokens to
  // the matched slots of its parent.
  net.begin_phase("up");
  const std::uint64_t per_slot = nq.value;
  for (std::uint32_t it = 0; it < ch.iterations; ++it) {
    net.local_rounds(2ull * ch.radius);
    res.max_holding = std::max(res.max_holding, balance(ch, held, slots));
    for (std::uint32_t c = 0; c < C; ++c)
      for (const auto& s : slots[c])
        if (s.size() > per_slot) throw std::logic_error("slot holds more than NQ tokens");
    std::vector<std::vector<std::uint32_t>> next(C);
    next[ch.root] = held[ch.root];
    slot_transfer(
        net, ch, true, per_slot, [&](std::uint32_t c) { return ch.parent[c] != kNone32; },
        [&](std::uint32_t c, std::uint32_t s, std::uint64_t r) -> std::optional<Message> {
          if (r >= slots[c][s].size()) return std::nullopt;
          return token_message(ts.tokens[slots[c][s][r]]);
        },
        [&](std::uint32_t c, std::uint32_t, std::uint64_t, const Message& m) { next[c].push_back(index.decode(m)); });
    held = std::move(next);
  }
  {
    std::vector<char> have(ts.tokens.size(), 0);
    for (auto i : held[ch.root]) have[i] = 1;
    res.root_complete = std::all_of(have.begin(), have.end(), [](char x) { return x != 0; });
  }

  // Down phase: the root balances once, then clusters forward their slots
  // level by level; a final local gather spreads everything in each cluster.
  net.begin_phase("down");
  net.local_rounds(2ull * ch.radius);
  {
    std::vector<std::vector<std::uint32_t>> only_root(C);
    only_root[ch.root] = held[ch.root];
    res.max_holding = std::max(res.max_holding, balance(ch, only_root, slots));
  }
  for (std::uint32_t it = 0; it < ch.iterations; ++it) {
    slot_transfer(
        net, ch, false, per_slot, [&](std::uint32_t c) { return ch.depth[c] == it; },
        [&](std::uint32_t c, std::uint32_t s, std::uint64_t r) -> std::optional<Message> {
          if (r >= slots[c][s].size()) return std::nullopt;
          return token_message(ts.tokens[slots[c][s][r]]);
        },
        [&](std::uint32_t c, std::uint32_t s, std::uint64_t, const Message& m) {
          slots[c][s].push_back(index.decode(m));
        });
  }
  net.local_rounds(2ull * ch.radius);

  const std::size_t words = ceil_div(ts.tokens.size(), 64);
  std::vector<Bits> per_cluster(C, Bits(words, 0));
  for (std::uint32_t c = 0; c < C; ++c)
    for (const auto& s : slots[c])
      for (auto i : s) set_bit(per_cluster[c], i);
  res.known.resize(n);
  for (NodeId v = 0; v < n; ++v) res.known[v] = per_cluster[cl.cluster[v]];
  res.rounds = net.rounds() - start;
  return res;
}

namespace {

AggregationResult aggregate_on_chain(Network& net, const ClusterChain& ch, std::uint64_t k,
                                     const std::function<AggVal(NodeId, std::uint32_t)>& value,
                                     const AggFn& fn, const AggVal& identity) {
  const auto& cl = ch.clusters;
  const std::size_t C = cl.count();
  const std::uint32_t S = ch.slots;
  const std::uint64_t per_slot = ceil_div(k, S);
  auto encode = [&](const AggVal& v) {
    Message m(kVal, {});
    for (std::uint8_t i = 0; i < fn.words; ++i) m.word(v[i]);
    return m;
  };
  auto decode = [&](const Message& m) {
    AggVal v{0, 0};
    for (std::uint8_t i = 0; i < fn.words; ++i) v[i] = m.w[i];
    return v;
  };

  // Inside every cluster: gather, fold and hand value i to slot i mod S.
  net.begin_phase("pre_aggregate");
  std::vector<std::vector<AggVal>> cv(C, std::vector<AggVal>(k, identity));
  for (std::uint32_t c = 0; c < C; ++c)
    for (NodeId v : cl.members[c])
      for (std::uint32_t i = 0; i < k; ++i) cv[c][i] = fn.combine(cv[c][i], value(v, i));
  net.local_rounds(2ull * ch.radius);

  // The r-th value of slot s is aggregate s + r*S; the index rides on the schedule.
  auto item = [&](std::uint32_t c, std::uint32_t s, std::uint64_t r) -> std::optional<Message> {
    std::uint64_t i = s + r * S;
    if (i >= k) return std::nullopt;
    return encode(cv[c][i]);
  };
  net.begin_phase("aggregate_up");
  for (std::uint32_t it = 0; it < ch.iterations; ++it) {
    const std::uint32_t lvl = ch.iterations - it;
    auto next = cv;
    slot_transfer(
        net, ch, true, per_slot, [&](std::uint32_t c) { return ch.parent[c] != kNone32 && ch.depth[c] == lvl; },
        item,
        [&](std::uint32_t c, std::uint32_t s, std::uint64_t r, const Message& m) {
          std::uint64_t i = s + r * S;
          next[c][i] = fn.combine(next[c][i], decode(m));
        });
    cv = std::move(next);
  }
  net.begin_phase("aggregate_down");
  for (std::uint32_t it = 0; it < ch.iterations; ++it) {
    auto next = cv;
    slot_transfer(
        net, ch, false, per_slot, [&](std::uint32_t c) { return ch.depth[c] == it; }, item,
        [&](std::uint32_t c, std::uint32_t s, std::uint64_t r, const Message& m) { next[c][s + r * S] = decode(m); });
    cv = std::move(next);
  }
  net.local_rounds(2ull * ch.radius);

  AggregationResult res;
  res.k = k;
  res.cluster = cl.cluster;
  res.per_cluster = std::move(cv);
  return res;
}

}  // namespace

AggregationResult k_aggregate(Network& net, std::uint64_t k,
                              const std::function<AggVal(NodeId, std::uint32_t)>& value, const AggFn& fn,
                              const AggVal& identity) {
  const std::size_t n = net.n();
  if (k < 1 || k > n) throw ConfigError("k_aggregate needs 1 <= k <= n");
  const std::uint64_t start = net.rounds();
  net.begin_phase("overlay");
  auto tree = build_virtual_tree(net);
  auto nq = nq_distributed(net, k, &tree);
  auto ch = build_cluster_chain(net, k, nq, tree);
  auto res = aggregate_on_chain(net, ch, k, value, fn, identity);
  res.nq = nq.value;
  res.rounds = net.rounds() - start;
  return res;
}

AggregationResult k_aggregate(Network& net, std::uint64_t k,
                              const std::function<std::uint64_t(NodeId, std::uint32_t)>& value, AggOp op) {
  AggVal id{op == AggOp::Min ? ~0ull : 0ull, 0};
  if (op == AggOp::Min) {
    // The identity must fit a message; the widest legal word serves.
    id[0] = net.msg_bits() >= 64 ? ~0ull : (1ull << net.msg_bits()) - 1;
  }
  return k_aggregate(
      net, k, [&](NodeId v, std::uint32_t i) { return AggVal{value(v, i), 0}; }, agg_fn(op), id);
}

ViaAggregateResult disseminate_via_aggregate(Network& net, const TokenSet& ts) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  ts.validate(net);
  const std::uint64_t start = net.rounds();
  net.begin_phase("overlay");
  auto tree = build_virtual_tree(net);
  const std::uint64_t k = total_tokens(net, tree, ts);
  if (k < 1 || k > n) throw ConfigError("disseminate_via_aggregate needs 1 <= k <= n");

  // Index allocation over a tree of the holders.
  net.begin_phase("allocate");
  const std::uint64_t alloc_start = net.rounds();
  std::vector<char> flag(n, 0);
  std::vector<std::uint64_t> weight(n, 0);
  std::vector<std::vector<std::uint32_t>> own(n);
  for (std::uint32_t i = 0; i < ts.tokens.size(); ++i) {
    flag[ts.holder[i]] = 1;
    ++weight[ts.holder[i]];
    own[ts.holder[i]].push_back(i);
  }
  auto holders = prune_tree(net, tree, flag);
  auto offset = weighted_preorder(net, holders, weight);
  ViaAggregateResult out;
  out.index.assign(ts.tokens.size(), 0);
  std::vector<std::uint32_t> owner_of(k, kNone32);  // index -> token
  for (NodeId v = 0; v < n; ++v)
    for (std::size_t j = 0; j < own[v].size(); ++j) {
      std::uint64_t idx = offset[v] + j;
      if (idx >= k || owner_of[idx] != kNone32) throw std::logic_error("index allocation collided");
      owner_of[idx] = own[v][j];
      out.index[own[v][j]] = static_cast<std::uint32_t>(idx);
    }
  out.allocation_rounds = net.rounds() - alloc_start;

  // Aggregate i carries token (origin, seq, payload) as two words; absent
  // inputs are zero and MAX keeps the single present one.
  const std::uint32_t pb = ts.payload_bits;
  AggFn fn;
  fn.words = 2;
  fn.combine = [](const AggVal& a, const AggVal& b) { return a[1] != b[1] ? (a[1] > b[1] ? a : b) : (a[0] > b[0] ? a : b); };
  auto value = [&](NodeId v, std::uint32_t i) -> AggVal {
    std::uint32_t t = owner_of[i];
    if (ts.holder[t] != v) return {0, 0};
    const Token& tok = ts.tokens[t];
    return {tok.origin, ((static_cast<std::uint64_t>(tok.seq) << pb) | tok.payload) + 1};
  };
  auto nq = nq_distributed(net, k, &tree);
  auto ch = build_cluster_chain(net, k, nq, tree);
  auto agg = aggregate_on_chain(net, ch, k, value, fn, AggVal{0, 0});

  DisseminationResult& res = out.result;
  res.k = k;
  res.nq = nq.value;
  res.clusters = ch.clusters.count();
  res.slots = ch.slots;
  res.iterations = ch.iterations;
  res.tokens = ts.tokens;
  TokenIndex index(ts.tokens);
  const std::size_t words = ceil_div(ts.tokens.size(), 64);
  std::vector<Bits> per_cluster(agg.per_cluster.size(), Bits(words, 0));
  for (std::size_t c = 0; c < agg.per_cluster.size(); ++c)
    for (const AggVal& x : agg.per_cluster[c]) {
      if (x[1] == 0) continue;
      std::uint64_t body = x[1] - 1;
      Message m(kTok, {x[0], body >> pb, body & ((1ull << pb) - 1)});
      set_bit(per_cluster[c], index.decode(m));
    }
  res.known.resize(n);
  for (NodeId v = 0; v < n; ++v) res.known[v] = per_cluster[agg.cluster[v]];
  res.rounds = net.rounds() - start;
  return out;
}

DisseminationResult flood_disseminate(Network& net, const TokenSet& ts) {
  const Graph& g = net.graph();
  const std::size_t n = g.n();
  ts.validate(net);
  const std::uint64_t start = net.rounds();
  net.begin_phase("flood");
  DisseminationResult res;
  res.k = ts.tokens.size();
  res.tokens = ts.tokens;
  const std::size_t words = ceil_div(ts.tokens.size(), 64);
  res.known.assign(n, Bits(words, 0));
  std::vector<std::vector<std::uint32_t>> own(n);
  for (std::uint32_t i = 0; i < ts.tokens.size(); ++i) own[ts.holder[i]].push_back(i);
  std::uint32_t rounds = 0;
  for (NodeId h = 0; h < n; ++h) {
    if (own[h].empty()) continue;
    auto d = bfs_hops(g, h);
    for (NodeId v = 0; v < n; ++v) {
      rounds = std::max(rounds, d[v]);
      for (auto i : own[h]) set_bit(res.known[v], i);
    }
  }
  net.local_rounds(std::max<std::uint32_t>(rounds, 1));
  res.rounds = net.rounds() - start;
  return res;
}

std::uint64_t broadcast_values(Network& net, const std::vector<NodeId>& holder,
                               const std::vector<std::vector<std::uint64_t>>& items) {
  if (holder.size() != items.size()) throw ConfigError("holder and item lists differ in length");
  const std::size_t n = net.n();
  std::size_t words = 0;
  for (const auto& it : items) words = std::max(words, it.size());
  std::vector<std::uint32_t> width(words, 1);
  for (const auto& it : items)
    for (std::size_t j = 0; j < it.size(); ++j) width[j] = std::max(width[j], bitwidth(it[j]));
  std::uint32_t pb = max_payload_bits(net, n);
  std::vector<std::pair<NodeId, std::uint64_t>> chunks;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (holder[i] >= n) throw ConfigError("holder out of range");
    for (std::size_t j = 0; j < words; ++j) {
      std::uint64_t x = j < items[i].size() ? items[i][j] : 0;
      for (std::uint32_t off = 0; off < width[j]; off += pb)
        chunks.push_back({holder[i], (x >> off) & ((1ull << pb) - 1)});
    }
  }
  std::uint64_t start = net.rounds();
  const Graph& g = net.graph();
  for (std::size_t b = 0; b < chunks.size(); b += n) {
    TokenSet ts;
    ts.payload_bits = pb;
    std::map<NodeId, std::uint32_t> next;
    for (std::size_t i = b; i < std::min(chunks.size(), b + n); ++i) {
      NodeId h = chunks[i].first;
      ts.tokens.push_back({g.id(h), next[h]++, chunks[i].second});
      ts.holder.push_back(h);
    }
    auto r = k_disseminate(net, ts);
    if (!r.complete()) throw std::logic_error("broadcast left a node without every value");
  }
  return net.rounds() - start;
}

}  // namespace hyb
