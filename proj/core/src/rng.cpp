#include "secform/rng.hpp"

#include <bit>

#include "secform/errors.hpp"

namespace secform {

Mt19937Source::Mt19937Source() {
  std::random_device rd;
  std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
  engine_.seed(seq);
}

u128 RandomSource::next_u128() {
  const u128 hi = next_u64();
  return (hi << 64) | next_u64();
}

u128 RandomSource::uniform_residue(u128 q) {
  if (q == 0) throw ConfigError("uniform_residue: zero modulus");
  if (q == 1) return 0;
  const u128 top = q - 1;
  const auto hi = static_cast<std::uint64_t>(top >> 64);
  const auto lo = static_cast<std::uint64_t>(top);
  const int bits = hi ? 128 - std::countl_zero(hi) : 64 - std::countl_zero(lo);
  if (bits <= 64) {
    const std::uint64_t mask =
        bits == 64 ? ~0ULL : ((1ULL << bits) - 1);
    for (;;) {
      const std::uint64_t draw = next_u64() & mask;
      if (draw < q) return draw;
    }
  }
  const u128 mask = (static_cast<u128>(1) << bits) - 1;
  for (;;) {
    const u128 draw = next_u128() & mask;
    if (draw < q) return draw;
  }
}

std::int64_t RandomSource::signed_uniform(std::int64_t range) {
  if (range <= 0) throw ConfigError("signed_uniform: non-positive range");
  const u128 k = uniform_residue(static_cast<u128>(range));
  const std::int64_t v = static_cast<std::int64_t>(k);
  // centered representative: {0,..,ceil(r/2)-1} stay, the rest wrap negative
  const std::int64_t pivot = (range + 1) / 2;
  return v < pivot ? v : v - range;
}

double RandomSource::uniform_real(double lo, double hi) {
  const double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

}  // namespace secform
