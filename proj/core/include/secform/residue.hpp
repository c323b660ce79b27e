#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace secform {

// All modular arithmetic runs over moduli that are powers of ten, up to 10^30.
// Residues are kept canonical in [0, q); q itself does not fit in 64 bits for
// the production parameter set, so the scalar type is the compiler's 128-bit
// integer throughout.
using u128 = unsigned __int128;
using i128 = __int128;

std::string to_string(u128 v);
std::string to_string(i128 v);

// Parses a decimal unsigned integer; throws ParseError on garbage or overflow.
u128 parse_u128(std::string_view text);

// 10^exp; exp must be within [0, 38].
u128 pow10_u128(int exp);

// Exponent k with v == 10^k, or -1 when v is not a power of ten.
int power_of_ten_exponent(u128 v);

// A power-of-ten modulus with its halves precomputed so that products of two
// full residues can be reduced without leaving 128-bit arithmetic:
// q = low * high, high = 10^ceil(digits/2), and q divides high^2.
struct DecimalModulus {
  u128 q = 0;
  int digits = 0;
  u128 high = 0;
  u128 low = 0;

  static DecimalModulus from_modulus(u128 q);
};

u128 add_mod(u128 a, u128 b, u128 q);
u128 sub_mod(u128 a, u128 b, u128 q);
u128 neg_mod(u128 a, u128 q);

// Canonical representative of a signed value.
u128 reduce_signed(i128 x, u128 q);

// Centered representative in [-q/2, q/2).
i128 center(u128 x, u128 q);

// (a * b) mod q for canonical a, b. Splits both operands at `high` so every
// intermediate stays below 2^127 even for q = 10^30.
u128 mul_mod(u128 a, u128 b, const DecimalModulus& m);

// Round-half-away-from-zero division by a positive divisor.
i128 round_div_half_away(i128 value, u128 divisor);

}  // namespace secform
