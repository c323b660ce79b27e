#pragma once

#include <cstdint>

#include "secform/residue.hpp"

namespace secform::mulq {

// Significant-figures quantizer configuration. sigma leading decimal digits
// of the input survive quantization; the level set is uniform within each
// decade and logarithmic across decades.
struct MulqConfig {
  int sigma = 4;
};

void validate(const MulqConfig& cfg);

// A quantized real: digits * 10^(-scale_exp), with digits an exact signed
// integer of at most sigma+1 decimal digits (the +1 absorbs round-up across a
// decade boundary, e.g. 0.9996 at sigma=3 -> digits 1000).
struct QuantizedValue {
  std::int64_t digits = 0;
  int scale_exp = 0;
  int sigma = 0;

  double value() const;
};

// Exact floor(log10(|x|)); x must be finite and nonzero.
int floor_log10_abs(double x);

// Exponent of the base-10 scaling factor: sigma - floor(log10|x|) - 1.
// Zero input maps to exponent 0 by convention.
int scale_exponent(double x, const MulqConfig& cfg);

// Digit integer and exponent of the quantized value. The digit integer is
// round-half-away-from-zero of |x| * 10^exp, computed in exact rational
// arithmetic so no binary rounding can alter it.
QuantizedValue to_plaintext(double x, const MulqConfig& cfg);

// The quantized real itself.
double quantize(double x, const MulqConfig& cfg);

// Sector-bound checks, evaluated in exact rational arithmetic:
//   A1:  (1 - h)|x|^2 <= x Q(x) <= (1 + h)|x|^2,   h = 0.5/10^(sigma-1)
//   A2:  |x - Q(x)| <= h |x|
//   A3:  |Q(x)| <= (1 + h)|x|
bool sector_check_a1(double x, const MulqConfig& cfg);
bool sector_check_a2(double x, const MulqConfig& cfg);
bool sector_check_a3(double x, const MulqConfig& cfg);

// Correctly rounded 10^exp as a double (clamps to 0 / inf outside the
// representable decade range).
double pow10_double(int exp);

// digits * 10^(-scale_exp) as a double. Shared by every consumer that turns
// digit integers back into reals so that independently computed paths agree
// bit-for-bit.
double decimal_value(i128 digits, int scale_exp);

// Product of two quantized values: exact integer product of the digit
// integers, rescaled once.
double quantized_product(const QuantizedValue& a, const QuantizedValue& b);

}  // namespace secform::mulq
