#pragma once

#include <cstdint>
#include <random>

#include "secform/residue.hpp"

namespace secform {

// Injected randomness interface. Every operation that samples takes one of
// these explicitly so runs are reproducible from a seed.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual std::uint64_t next_u64() = 0;

  u128 next_u128();

  // Uniform over [0, q) by rejection on the minimal power-of-two window.
  u128 uniform_residue(u128 q);

  // Uniform over the signed half-open set {b : -range/2 <= b < range/2},
  // mapping the draw through centered residues so a zeroed source yields 0.
  std::int64_t signed_uniform(std::int64_t range);

  double uniform_real(double lo, double hi);
};

class Mt19937Source final : public RandomSource {
 public:
  Mt19937Source();  // seeded from std::random_device
  explicit Mt19937Source(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Degenerate source for tests: always returns zero.
class ZeroSource final : public RandomSource {
 public:
  std::uint64_t next_u64() override { return 0; }
};

}  // namespace secform
