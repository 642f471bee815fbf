#pragma once

#include <cstdint>
#include <vector>

namespace hyb {

// Random member of a kappa-wise independent family [n] x [n] -> [n]: a
// polynomial of degree kappa-1 over Z_p (p the smallest prime >= n^2)
// evaluated at i*n + j and reduced mod n.
struct HashFamilyMember {
  std::uint32_t kappa = 1;
  std::uint64_t n = 1;
  std::uint64_t p = 2;
  std::vector<std::uint64_t> coeff;  // constant term last

  std::uint64_t eval(std::uint64_t i, std::uint64_t j) const;
  std::uint64_t eval_key(std::uint64_t key) const;
  // Bits needed to publish the coefficients.
  std::uint64_t seed_bits() const;
};

bool is_prime(std::uint64_t x);
std::uint64_t next_prime(std::uint64_t x);

HashFamilyMember sample_hash(std::uint32_t kappa, std::uint64_t n, std::uint64_t seed);
// Same function from already drawn coefficients.
HashFamilyMember hash_from_coefficients(std::uint64_t n, std::vector<std::uint64_t> coeff);

}  // namespace hyb
