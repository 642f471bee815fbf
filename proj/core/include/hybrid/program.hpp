#pragma once

#include <span>
#include <string>
#include <vector>

#include "hybrid/network.hpp"

namespace hyb {

class NodeProgram;

class NodeContext {
 public:
  NodeId index() const { return v_; }
  Ident id() const { return net_->id(v_); }
  std::uint64_t round() const { return round_; }
  const Graph& graph() const { return net_->graph(); }
  const Network& network() const { return *net_; }
  std::span<const Arc> neighbors() const { return net_->graph().adj(v_); }
  Rng& rng() { return net_->rng(v_); }
  bool knows(Ident x) const { return net_->knows(v_, x); }

  void send_local(NodeId neighbor, LocalMessage m);
  void send_global(Ident to, Message m);
  void halt() { halted_ = true; }
  void output(std::string s);

 private:
  friend Transcript execute(const Graph&, const ModelConfig&, NodeProgram&, std::uint64_t,
                            std::uint64_t, std::vector<std::vector<Envelope>>*);
  Network* net_ = nullptr;
  NodeId v_ = 0;
  std::uint64_t round_ = 0;
  bool halted_ = false;
  std::vector<Envelope>* gout_ = nullptr;
  std::vector<LocalEnvelope>* lout_ = nullptr;
  std::vector<std::string>* outputs_ = nullptr;
};

// Per-node handlers. State lives in the program object, indexed by node;
// handlers should depend only on (state, inbox, ctx.rng()).
class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  // Round-0 input injection.
  virtual void init(NodeContext&) {}
  virtual void on_round(NodeContext& ctx, std::span<const LocalEnvelope> local,
                        std::span<const Envelope> global) = 0;
};

// Runs lock-step rounds 1..budget until every node has halted. Messages sent
// in round r arrive in round r+1. At least one round always elapses. Budget
// exhaustion is reported in the transcript; cap violations under FAIL throw.
// When global_log is given it receives the global sends of every round.
Transcript execute(const Graph& g, const ModelConfig& cfg, NodeProgram& program,
                   std::uint64_t round_budget, std::uint64_t seed,
                   std::vector<std::vector<Envelope>>* global_log = nullptr);

}  // namespace hyb
