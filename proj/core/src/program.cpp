#include "hybrid/program.hpp"

#include <algorithm>

namespace hyb {

void NodeContext::send_local(NodeId neighbor, LocalMessage m) {
  lout_->push_back({v_, neighbor, std::move(m)});
}

void NodeContext::send_global(Ident to, Message m) {
  const Graph& g = net_->graph();
  if (!g.has_id(to)) throw ProtocolError("global send to nonexistent id " + std::to_string(to));
  gout_->push_back({v_, g.index_of(to), m});
}

void NodeContext::output(std::string s) { (*outputs_)[v_] = std::move(s); }

Transcript execute(const Graph& g, const ModelConfig& cfg, NodeProgram& program,
                   std::uint64_t round_budget, std::uint64_t seed,
                   std::vector<std::vector<Envelope>>* global_log) {
  if (round_budget < 1) throw ConfigError("round budget must be >= 1");
  Network net(g, cfg, seed);
  const std::size_t n = g.n();
  std::vector<NodeContext> ctx(n);
  std::vector<Envelope> gout;
  std::vector<LocalEnvelope> lout;
  std::vector<std::string> outputs(n);
  for (NodeId v = 0; v < n; ++v) {
    ctx[v].net_ = &net;
    ctx[v].v_ = v;
    ctx[v].gout_ = &gout;
    ctx[v].lout_ = &lout;
    ctx[v].outputs_ = &outputs;
    program.init(ctx[v]);
  }
  // Sends issued during init are not allowed: inputs are knowledge, not traffic.
  gout.clear();
  lout.clear();

  Delivery ginbox;
  std::vector<LocalEnvelope> linbox;
  std::vector<std::uint32_t> loff(n + 1, 0);
  bool done = false;
  for (std::uint64_t r = 1; r <= round_budget; ++r) {
    for (NodeId v = 0; v < n; ++v) {
      if (ctx[v].halted_) continue;
      ctx[v].round_ = r;
      std::span<const LocalEnvelope> lin;
      if (!linbox.empty()) lin = {linbox.data() + loff[v], linbox.data() + loff[v + 1]};
      program.on_round(ctx[v], lin, ginbox.at(v));
    }
    std::vector<LocalEnvelope> sent_local = lout;
    if (global_log) global_log->push_back(gout);
    ginbox = net.round(std::move(gout), std::move(lout));
    gout.clear();
    lout.clear();
    linbox = std::move(sent_local);
    std::stable_sort(linbox.begin(), linbox.end(), [](const LocalEnvelope& a, const LocalEnvelope& b) {
      return a.to != b.to ? a.to < b.to : a.from < b.from;
    });
    std::fill(loff.begin(), loff.end(), 0);
    for (const auto& e : linbox) ++loff[e.to + 1];
    for (std::size_t i = 1; i <= n; ++i) loff[i] += loff[i - 1];
    done = std::all_of(ctx.begin(), ctx.end(), [](const NodeContext& c) { return c.halted_; });
    if (done) break;
  }
  Transcript tr = net.transcript();
  tr.all_halted = done;
  tr.budget_exhausted = !done;
  tr.outputs = std::move(outputs);
  return tr;
}

}  // namespace hyb
