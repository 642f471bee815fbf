#include "hybrid/network.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "hybrid/distances.hpp"

namespace hyb {

ModelConfig ModelConfig::resolved(std::size_t n) const {
  ModelConfig c = *this;
  std::uint32_t l = log_n(n);
  if (c.msg_bits == 0) c.msg_bits = c.c_bits * l;
  if (c.send_cap == 0) c.send_cap = l;
  if (c.recv_cap == 0) c.recv_cap = l;
  if (c.send_cap < 1 || c.recv_cap < 1) throw ConfigError("caps must be >= 1");
  if (c.id_mode == IdMode::Hybrid0 && c.id_exponent < 1)
    throw ConfigError("HYBRID0 id exponent must be >= 1");
  return c;
}

std::string to_string(IdMode m) { return m == IdMode::Hybrid ? "hybrid" : "hybrid0"; }

IdMode parse_id_mode(const std::string& s) {
  if (s == "hybrid") return IdMode::Hybrid;
  if (s == "hybrid0") return IdMode::Hybrid0;
  throw ConfigError("mode must be hybrid or hybrid0, got '" + s + "'");
}

Message::Message(std::uint32_t t, std::initializer_list<std::uint64_t> words,
                 std::initializer_list<Ident> ids)
    : tag(t) {
  for (auto x : words) word(x);
  for (auto x : ids) ident(x);
}

Message& Message::word(std::uint64_t x) {
  if (nw == w.size()) throw ProtocolError("message holds at most 4 words");
  w[nw++] = x;
  return *this;
}

Message& Message::ident(Ident x) {
  if (nid == id.size()) throw ProtocolError("message holds at most 3 ids");
  id[nid++] = x;
  return *this;
}

std::uint64_t Message::bits(std::uint32_t id_bits) const {
  std::uint64_t b = static_cast<std::uint64_t>(nid) * id_bits;
  for (std::uint8_t i = 0; i < nw; ++i) b += bitwidth(w[i]);
  return b;
}

std::uint64_t LocalMessage::bits(std::uint32_t id_bits) const {
  std::uint64_t b = extra_bits + ids.size() * static_cast<std::uint64_t>(id_bits);
  for (auto x : data) b += bitwidth(x);
  return b;
}

Delivery::Delivery(std::size_t n, std::vector<Envelope> msgs) : msgs_(std::move(msgs)), off_(n + 1, 0) {
  std::stable_sort(msgs_.begin(), msgs_.end(), [](const Envelope& a, const Envelope& b) {
    return a.to != b.to ? a.to < b.to : a.from < b.from;
  });
  for (const auto& e : msgs_) ++off_[e.to + 1];
  for (std::size_t i = 1; i <= n; ++i) off_[i] += off_[i - 1];
}

std::span<const Envelope> Delivery::at(NodeId v) const {
  if (off_.empty()) return {};
  return {msgs_.data() + off_[v], msgs_.data() + off_[v + 1]};
}

Network::Network(const Graph& g, ModelConfig cfg, std::uint64_t seed)
    : g_(&g), cfg_(cfg.resolved(g.n())), seed_(seed), logn_(hyb::log_n(g.n())) {
  id_bits_ = cfg_.id_mode == IdMode::Hybrid ? logn_ : cfg_.id_exponent * logn_;
  rngs_.reserve(g.n());
  for (NodeId v = 0; v < g.n(); ++v) rngs_.emplace_back(seed, g.id(v));
  if (hybrid0()) {
    known_.resize(g.n());
    for (NodeId v = 0; v < g.n(); ++v) {
      known_[v].insert(g.id(v));
      for (const auto& a : g.adj(v)) known_[v].insert(g.id(a.to));
    }
  }
  scount_.assign(g.n(), 0);
  rcount_.assign(g.n(), 0);
  tr_.max_sends.assign(g.n(), 0);
  tr_.max_recvs.assign(g.n(), 0);
}

bool Network::knows(NodeId v, Ident x) const { return !hybrid0() || known_[v].count(x) != 0; }

void Network::learn(NodeId v, Ident x) {
  if (hybrid0()) known_[v].insert(x);
}

void Network::learn_ball(NodeId v, std::uint32_t t) {
  if (!hybrid0()) return;
  for (NodeId u : ball(*g_, v, t)) known_[v].insert(g_->id(u));
}

void Network::begin_phase(std::string name) { tr_.phases.push_back({std::move(name), 0, 0}); }

void Network::violation(NodeId v, std::string kind, std::string detail, bool fatal) {
  tr_.violations.push_back({tr_.rounds, v, kind, detail});
  if (fatal) {
    std::fill(scount_.begin(), scount_.end(), 0);
    std::fill(rcount_.begin(), rcount_.end(), 0);
    std::string what = kind + " at node " + std::to_string(g_->id(v)) + " in round " +
                       std::to_string(tr_.rounds) + ": " + detail;
    if (kind == "send_cap" || kind == "recv_cap" || kind == "local_limit") throw CapViolation(what);
    throw ProtocolError(what);
  }
}

void Network::tick(std::uint64_t span) {
  if (tr_.rounds + span > budget_) {
    tr_.budget_exhausted = true;
    throw BudgetExhausted("round budget of " + std::to_string(budget_) + " exhausted");
  }
  tr_.rounds += span;
  if (!tr_.phases.empty()) tr_.phases.back().rounds += span;
}

void Network::record(const RoundRecord& r) {
  if (r.global_msgs == 0 && !tr_.per_round.empty()) {
    auto& last = tr_.per_round.back();
    if (last.global_msgs == 0 && last.first + last.span == r.first) {
      last.span += r.span;
      last.local_msgs += r.local_msgs;
      last.local_bits += r.local_bits;
      return;
    }
  }
  tr_.per_round.push_back(r);
}

void Network::local_rounds(std::uint64_t t, std::uint64_t msgs, std::uint64_t bits) {
  if (t == 0) return;
  RoundRecord r;
  r.first = tr_.rounds + 1;
  r.span = t;
  r.local_msgs = msgs;
  r.local_bits = bits;
  tick(t);
  tr_.local_msgs += msgs;
  tr_.local_bits += bits;
  record(r);
}

Delivery Network::round(std::vector<Envelope> global, std::vector<LocalEnvelope> local) {
  tick(1);
  RoundRecord rec;
  rec.first = tr_.rounds;
  bool fail = cfg_.overflow == OverflowPolicy::Fail;

  // Size and addressing checks are unconditional errors.
  for (const auto& e : global) {
    if (e.from >= n() || e.to >= n()) throw ProtocolError("global message endpoint out of range");
    auto b = e.msg.bits(id_bits_);
    if (b > cfg_.msg_bits)
      violation(e.from, "oversized",
                std::to_string(b) + " bits exceed the " + std::to_string(cfg_.msg_bits) + "-bit limit",
                true);
    if (!knows(e.from, g_->id(e.to)))
      violation(e.from, "unknown_id", "id " + std::to_string(g_->id(e.to)) + " not known", true);
    for (std::uint8_t i = 0; i < e.msg.nid; ++i)
      if (!knows(e.from, e.msg.id[i]))
        violation(e.from, "unknown_id", "forwarding unknown id " + std::to_string(e.msg.id[i]), true);
  }

  std::vector<char> keep(global.size(), 1);
  std::vector<NodeId> touched;
  for (std::size_t i = 0; i < global.size(); ++i) {
    NodeId f = global[i].from;
    if (scount_[f] == 0) touched.push_back(f);
    if (++scount_[f] > cfg_.send_cap) {
      if (scount_[f] == cfg_.send_cap + 1)
        violation(f, "send_cap", "more than " + std::to_string(cfg_.send_cap) + " global sends", fail);
      keep[i] = 0;
      ++tr_.dropped;
    }
  }
  // Receivers see senders in ascending order; excess beyond the cap is dropped
  // from the tail under DROP_ARBITRARY.
  std::vector<std::size_t> order(global.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return global[a].to != global[b].to ? global[a].to < global[b].to : global[a].from < global[b].from;
  });
  for (std::size_t i : order) {
    if (!keep[i]) continue;
    NodeId t = global[i].to;
    if (rcount_[t] == 0 && scount_[t] == 0) touched.push_back(t);
    if (++rcount_[t] > cfg_.recv_cap) {
      if (rcount_[t] == cfg_.recv_cap + 1)
        violation(t, "recv_cap", "more than " + std::to_string(cfg_.recv_cap) + " global receives", fail);
      keep[i] = 0;
      ++tr_.dropped;
    }
  }
  for (NodeId v : touched) {
    tr_.max_sends[v] = std::max(tr_.max_sends[v], scount_[v]);
    tr_.max_recvs[v] = std::max(tr_.max_recvs[v], rcount_[v]);
    scount_[v] = 0;
    rcount_[v] = 0;
  }

  std::vector<Envelope> out;
  out.reserve(global.size());
  for (std::size_t i = 0; i < global.size(); ++i) {
    if (!keep[i]) continue;
    rec.global_msgs++;
    rec.global_bits += global[i].msg.bits(id_bits_);
    if (hybrid0()) {
      known_[global[i].to].insert(g_->id(global[i].from));
      for (std::uint8_t j = 0; j < global[i].msg.nid; ++j) known_[global[i].to].insert(global[i].msg.id[j]);
    }
    out.push_back(std::move(global[i]));
  }

  if (!local.empty()) {
    std::map<std::pair<NodeId, NodeId>, std::uint64_t> per_edge;
    for (const auto& e : local) {
      if (e.from >= n() || e.to >= n() || !g_->has_edge(e.from, e.to))
        violation(e.from, "non_neighbor", "local send to non-neighbor", true);
      auto b = e.msg.bits(id_bits_);
      rec.local_msgs++;
      rec.local_bits += b;
      if (cfg_.local_limit) {
        auto& acc = per_edge[{e.from, e.to}];
        acc += b;
        if (acc > *cfg_.local_limit)
          violation(e.from, "local_limit", "local edge budget exceeded", fail);
      }
      if (hybrid0()) {
        known_[e.to].insert(g_->id(e.from));
        for (auto x : e.msg.ids) known_[e.to].insert(x);
      }
    }
  }
  tr_.global_msgs += rec.global_msgs;
  tr_.global_bits += rec.global_bits;
  tr_.local_msgs += rec.local_msgs;
  tr_.local_bits += rec.local_bits;
  if (!tr_.phases.empty()) tr_.phases.back().global_msgs += rec.global_msgs;
  record(rec);
  return Delivery(n(), std::move(out));
}

std::uint64_t Network::exchange_rounds(std::uint32_t send_ports, std::uint32_t recv_ports) const {
  send_ports = std::max(send_ports, 1u);
  recv_ports = std::max(recv_ports, 1u);
  return ceil_div(send_ports, cfg_.send_cap) * ceil_div(recv_ports, cfg_.recv_cap);
}

Delivery Network::exchange(std::vector<PortedEnvelope> msgs, std::uint32_t send_ports,
                           std::uint32_t recv_ports) {
  send_ports = std::max(send_ports, 1u);
  recv_ports = std::max(recv_ports, 1u);
  std::uint64_t groups = ceil_div(recv_ports, cfg_.recv_cap);
  std::uint64_t total = exchange_rounds(send_ports, recv_ports);
  std::vector<std::vector<Envelope>> sub(total);
  for (auto& m : msgs) {
    if (m.send_port >= send_ports || m.recv_port >= recv_ports)
      throw ProtocolError("port index out of range in exchange");
    std::uint64_t s = (m.send_port / cfg_.send_cap) * groups + m.recv_port / cfg_.recv_cap;
    sub[s].push_back({m.from, m.to, m.msg});
  }
  std::vector<Envelope> all;
  for (auto& batch : sub) {
    auto d = round(std::move(batch));
    all.insert(all.end(), d.all().begin(), d.all().end());
  }
  return Delivery(n(), std::move(all));
}

}  // namespace hyb
