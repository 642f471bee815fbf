#pragma once

#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "hybrid/graph.hpp"
#include "hybrid/model.hpp"
#include "hybrid/rng.hpp"

namespace hyb {

struct PortedEnvelope {
  NodeId from;
  NodeId to;
  std::uint32_t send_port;
  std::uint32_t recv_port;
  Message msg;
};

// Messages delivered by one (possibly multi sub-round) exchange, grouped by
// receiver and ordered by sender then send order.
class Delivery {
 public:
  Delivery() = default;
  Delivery(std::size_t n, std::vector<Envelope> msgs);
  std::span<const Envelope> at(NodeId v) const;
  const std::vector<Envelope>& all() const { return msgs_; }
  std::size_t size() const { return msgs_.size(); }

 private:
  std::vector<Envelope> msgs_;
  std::vector<std::uint32_t> off_;
};

// Round engine used by the algorithm drivers. Drivers keep per-node state
// themselves; every global interaction goes through round()/exchange(), which
// enforce caps, message size and (in HYBRID0) id knowledge.
class Network {
 public:
  Network(const Graph& g, ModelConfig cfg, std::uint64_t seed);

  const Graph& graph() const { return *g_; }
  const ModelConfig& config() const { return cfg_; }
  std::size_t n() const { return g_->n(); }
  std::uint32_t log_n() const { return logn_; }
  std::uint32_t id_bits() const { return id_bits_; }
  std::uint32_t send_cap() const { return cfg_.send_cap; }
  std::uint32_t recv_cap() const { return cfg_.recv_cap; }
  std::uint32_t cap() const { return std::min(cfg_.send_cap, cfg_.recv_cap); }
  std::uint32_t msg_bits() const { return cfg_.msg_bits; }
  bool hybrid0() const { return cfg_.id_mode == IdMode::Hybrid0; }
  Ident id(NodeId v) const { return g_->id(v); }
  std::uint64_t seed() const { return seed_; }
  Rng& rng(NodeId v) { return rngs_[v]; }

  Delivery round(std::vector<Envelope> global, std::vector<LocalEnvelope> local = {});
  // One logical round split into sub-rounds by port so that no node exceeds
  // its caps as long as every (sender, send_port) and (receiver, recv_port)
  // pair is used at most once. Empty sub-rounds still cost a round.
  Delivery exchange(std::vector<PortedEnvelope> msgs, std::uint32_t send_ports,
                    std::uint32_t recv_ports);
  std::uint64_t exchange_rounds(std::uint32_t send_ports, std::uint32_t recv_ports) const;
  // t rounds in which only local edges carry traffic.
  void local_rounds(std::uint64_t t, std::uint64_t msgs = 0, std::uint64_t bits = 0);

  bool knows(NodeId v, Ident x) const;
  void learn(NodeId v, Ident x);
  // v learns the ids of every node within t hops (result of t local rounds).
  void learn_ball(NodeId v, std::uint32_t t);

  void begin_phase(std::string name);
  void set_budget(std::uint64_t rounds) { budget_ = rounds; }
  std::uint64_t rounds() const { return tr_.rounds; }
  const Transcript& transcript() const { return tr_; }
  Transcript& transcript() { return tr_; }

 private:
  void tick(std::uint64_t span);
  void record(const RoundRecord& r);
  void violation(NodeId v, std::string kind, std::string detail, bool fatal);

  const Graph* g_;
  ModelConfig cfg_;
  std::uint64_t seed_;
  std::uint32_t logn_;
  std::uint32_t id_bits_;
  std::uint64_t budget_ = std::numeric_limits<std::uint64_t>::max();
  std::vector<Rng> rngs_;
  std::vector<std::unordered_set<Ident>> known_;
  std::vector<std::uint32_t> scount_, rcount_;
  Transcript tr_;
};

}  // namespace hyb
