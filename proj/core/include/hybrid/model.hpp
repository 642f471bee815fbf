#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "hybrid/common.hpp"

namespace hyb {

enum class IdMode { Hybrid, Hybrid0 };
enum class OverflowPolicy { Fail, DropArbitrary };

struct ModelConfig {
  std::optional<std::uint64_t> local_limit;  // bits per edge per round; empty = unlimited
  std::uint32_t c_bits = 4;
  std::uint32_t msg_bits = 0;  // 0: c_bits * ceil(log2 n)
  std::uint32_t send_cap = 0;  // 0: ceil(log2 n)
  std::uint32_t recv_cap = 0;  // 0: ceil(log2 n)
  IdMode id_mode = IdMode::Hybrid;
  std::uint32_t id_exponent = 2;  // HYBRID0 ids come from [n^c]
  OverflowPolicy overflow = OverflowPolicy::Fail;

  // Fills derived fields for an n-node graph and checks invariants.
  ModelConfig resolved(std::size_t n) const;
};

std::string to_string(IdMode m);
IdMode parse_id_mode(const std::string& s);

// Global message. Header (tag) is free; words are charged at their bit width
// (at least one bit each) and ids at the id width of the model.
struct Message {
  std::uint32_t tag = 0;
  std::uint8_t nw = 0;
  std::uint8_t nid = 0;
  std::array<std::uint64_t, 4> w{};
  std::array<Ident, 3> id{};

  Message() = default;
  Message(std::uint32_t t, std::initializer_list<std::uint64_t> words,
          std::initializer_list<Ident> ids = {});

  Message& word(std::uint64_t x);
  Message& ident(Ident x);
  std::uint64_t bits(std::uint32_t id_bits) const;
};

struct LocalMessage {
  std::uint32_t tag = 0;
  std::vector<std::uint64_t> data;
  std::vector<Ident> ids;
  std::uint64_t extra_bits = 0;  // opaque payload size beyond data/ids

  std::uint64_t bits(std::uint32_t id_bits) const;
};

struct Envelope {
  NodeId from;
  NodeId to;
  Message msg;
};

struct LocalEnvelope {
  NodeId from;
  NodeId to;
  LocalMessage msg;
};

struct RoundRecord {
  std::uint64_t first = 0;  // first round number covered
  std::uint64_t span = 1;   // consecutive rounds summarised by this record
  std::uint64_t global_msgs = 0;
  std::uint64_t global_bits = 0;
  std::uint64_t local_msgs = 0;
  std::uint64_t local_bits = 0;
};

struct Violation {
  std::uint64_t round;
  NodeId node;
  std::string kind;
  std::string detail;
};

struct PhaseRecord {
  std::string name;
  std::uint64_t rounds = 0;
  std::uint64_t global_msgs = 0;
};

struct Transcript {
  std::uint64_t rounds = 0;
  std::uint64_t global_msgs = 0;
  std::uint64_t global_bits = 0;
  std::uint64_t local_msgs = 0;
  std::uint64_t local_bits = 0;
  std::uint64_t dropped = 0;
  std::vector<RoundRecord> per_round;
  std::vector<std::uint32_t> max_sends;
  std::vector<std::uint32_t> max_recvs;
  std::vector<Violation> violations;
  std::vector<PhaseRecord> phases;
  bool all_halted = true;
  bool budget_exhausted = false;
  std::vector<std::string> outputs;

  std::uint32_t peak_sends() const;
  std::uint32_t peak_recvs() const;
  std::string to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace hyb
