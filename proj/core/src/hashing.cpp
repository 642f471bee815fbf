#include "hybrid/hashing.hpp"

#include <algorithm>

#include "hybrid/common.hpp"
#include "hybrid/rng.hpp"

namespace hyb {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  for (std::uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (x % q == 0) return x == q;
  }
  std::uint64_t d = x - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t y = powmod(a, d, x);
    if (y == 1 || y == x - 1) continue;
    bool comp = true;
    for (int r = 1; r < s && comp; ++r) {
      y = mulmod(y, y, x);
      if (y == x - 1) comp = false;
    }
    if (comp) return false;
  }
  return true;
}

std::uint64_t next_prime(std::uint64_t x) {
  if (x <= 2) return 2;
  if ((x & 1) == 0) ++x;
  while (!is_prime(x)) x += 2;
  return x;
}

std::uint64_t HashFamilyMember::eval_key(std::uint64_t key) const {
  std::uint64_t x = key % p, acc = 0;
  for (std::uint64_t c : coeff) acc = (mulmod(acc, x, p) + c) % p;
  return acc % n;
}

std::uint64_t HashFamilyMember::eval(std::uint64_t i, std::uint64_t j) const {
  return eval_key((i % n) * n + (j % n));
}

std::uint64_t HashFamilyMember::seed_bits() const { return static_cast<std::uint64_t>(kappa) * bitwidth(p - 1); }

HashFamilyMember hash_from_coefficients(std::uint64_t n, std::vector<std::uint64_t> coeff) {
  if (n < 1) throw ConfigError("hash image must be non-empty");
  if (coeff.empty()) throw ConfigError("hash needs at least one coefficient");
  if (n > (1ull << 31)) throw ConfigError("hash domain too large");
  HashFamilyMember h;
  h.n = n;
  h.p = next_prime(std::max<std::uint64_t>(n * n, 2));
  h.kappa = static_cast<std::uint32_t>(coeff.size());
  for (auto& c : coeff) c %= h.p;
  h.coeff = std::move(coeff);
  return h;
}

HashFamilyMember sample_hash(std::uint32_t kappa, std::uint64_t n, std::uint64_t seed) {
  if (kappa < 1) throw ConfigError("kappa must be >= 1");
  if (n < 1) throw ConfigError("hash image must be non-empty");
  std::uint64_t p = next_prime(std::max<std::uint64_t>(n * n, 2));
  Rng rng(seed, 0x4a5e);
  std::vector<std::uint64_t> c(kappa);
  for (auto& x : c) x = rng.below(p);
  return hash_from_coefficients(n, std::move(c));
}

}  // namespace hyb
