#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace hyb {

using NodeId = std::uint32_t;
using Ident = std::uint64_t;
using Weight = std::uint64_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr std::uint32_t kNone32 = std::numeric_limits<std::uint32_t>::max();
inline constexpr Weight kInf = std::numeric_limits<Weight>::max() / 4;

// Bad parameters supplied by the caller.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A send that the model forbids regardless of overflow policy.
struct ProtocolError : std::logic_error {
  using std::logic_error::logic_error;
};

// Capacity violation under the FAIL policy.
struct CapViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint32_t ceil_log2(std::uint64_t x) {
  if (x <= 1) return 0;
  return static_cast<std::uint32_t>(std::bit_width(x - 1));
}

inline std::uint32_t floor_log2(std::uint64_t x) {
  return x == 0 ? 0 : static_cast<std::uint32_t>(std::bit_width(x) - 1);
}

// ceil(log2 n) clamped to at least 1 so caps never vanish on tiny graphs.
inline std::uint32_t log_n(std::uint64_t n) {
  std::uint32_t l = ceil_log2(n);
  return l == 0 ? 1 : l;
}

inline std::uint32_t bitwidth(std::uint64_t x) {
  return x == 0 ? 1 : static_cast<std::uint32_t>(std::bit_width(x));
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace hyb
