#include "secform/residue.hpp"

#include <algorithm>

#include "secform/errors.hpp"

namespace secform {

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string to_string(i128 v) {
  if (v < 0) return "-" + to_string(static_cast<u128>(-v));
  return to_string(static_cast<u128>(v));
}

u128 parse_u128(std::string_view text) {
  if (text.empty()) throw ParseError("empty integer literal");
  constexpr u128 kMax = ~static_cast<u128>(0);
  u128 v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') {
      throw ParseError("invalid digit in integer literal: '" + std::string(text) + "'");
    }
    const u128 digit = static_cast<u128>(c - '0');
    if (v > (kMax - digit) / 10) throw ParseError("integer literal overflows 128 bits");
    v = v * 10 + digit;
  }
  return v;
}

u128 pow10_u128(int exp) {
  if (exp < 0 || exp > 38) throw ParseError("pow10_u128 exponent out of range");
  u128 v = 1;
  for (int i = 0; i < exp; ++i) v *= 10;
  return v;
}

int power_of_ten_exponent(u128 v) {
  if (v == 0) return -1;
  int e = 0;
  while (v % 10 == 0) {
    v /= 10;
    ++e;
  }
  return v == 1 ? e : -1;
}

DecimalModulus DecimalModulus::from_modulus(u128 q) {
  const int digits = power_of_ten_exponent(q);
  if (digits < 1 || digits > 30) {
    throw ConfigError("modulus must be a power of ten in [10, 10^30]");
  }
  DecimalModulus m;
  m.q = q;
  m.digits = digits;
  m.high = pow10_u128((digits + 1) / 2);
  m.low = q / m.high;
  return m;
}

u128 add_mod(u128 a, u128 b, u128 q) {
  u128 s = a + b;
  if (s >= q) s -= q;
  return s;
}

u128 sub_mod(u128 a, u128 b, u128 q) { return a >= b ? a - b : a + (q - b); }

u128 neg_mod(u128 a, u128 q) { return a == 0 ? 0 : q - a; }

u128 reduce_signed(i128 x, u128 q) {
  const i128 qi = static_cast<i128>(q);
  i128 r = x % qi;
  if (r < 0) r += qi;
  return static_cast<u128>(r);
}

i128 center(u128 x, u128 q) {
  const u128 half = q / 2;
  if (x >= half) return static_cast<i128>(x) - static_cast<i128>(q);
  return static_cast<i128>(x);
}

u128 mul_mod(u128 a, u128 b, const DecimalModulus& m) {
  // a = a1*high + a0, b = b1*high + b0. The a1*b1*high^2 term vanishes mod q
  // because q divides high^2; everything left fits in 128 bits.
  const u128 a1 = a / m.high, a0 = a % m.high;
  const u128 b1 = b / m.high, b0 = b % m.high;
  const u128 cross = a1 * b0 + a0 * b1;        // < 2q
  u128 r = (cross % m.low) * m.high;           // (cross*high) mod q, exact
  u128 r0 = (a0 * b0) % m.q;                   // a0*b0 < high^2 <= 10q
  r += r0;
  if (r >= m.q) r -= m.q;
  return r;
}

i128 round_div_half_away(i128 value, u128 divisor) {
  const i128 d = static_cast<i128>(divisor);
  const i128 half = d / 2;
  if (value >= 0) return (value + half) / d;
  return -((-value + half) / d);
}

}  // namespace secform
