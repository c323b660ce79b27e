#include "secform/quantizer.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <boost/multiprecision/cpp_int.hpp>

#include "secform/errors.hpp"

namespace secform::mulq {

namespace {

using boost::multiprecision::cpp_int;

void require_finite(double x) {
  if (!std::isfinite(x)) throw ConfigError("quantizer input must be finite");
}

// |x| = mantissa * 2^exp2 exactly, mantissa in [2^52, 2^53) (or smaller for
// denormals).
struct Decomposed {
  std::uint64_t mantissa = 0;
  int exp2 = 0;
};

Decomposed decompose_abs(double x) {
  int e = 0;
  const double fr = std::frexp(std::fabs(x), &e);  // fr in [0.5, 1)
  Decomposed d;
  d.mantissa = static_cast<std::uint64_t>(std::ldexp(fr, 53));
  d.exp2 = e - 53;
  return d;
}

cpp_int pow10_cpp(int e) {
  cpp_int v = 1;
  for (int i = 0; i < e; ++i) v *= 10;
  return v;
}

// Compares a*2^p2a*10^p10a with b*2^p2b*10^p10b; a, b >= 0.
int cmp_scaled(cpp_int a, int p2a, int p10a, cpp_int b, int p2b, int p10b) {
  if (p2a >= p2b) {
    a <<= (p2a - p2b);
  } else {
    b <<= (p2b - p2a);
  }
  if (p10a >= p10b) {
    a *= pow10_cpp(p10a - p10b);
  } else {
    b *= pow10_cpp(p10b - p10a);
  }
  return a.compare(b);
}

// 10^d <= |x| test in exact arithmetic.
bool abs_at_least_pow10(const Decomposed& d, int e) {
  return cmp_scaled(cpp_int(d.mantissa), d.exp2, 0, cpp_int(1), 0, e) >= 0;
}

constexpr int kPowLo = -345;
constexpr int kPowHi = 309;

const std::array<double, kPowHi - kPowLo + 1>& pow10_table() {
  static const auto table = [] {
    std::array<double, kPowHi - kPowLo + 1> t{};
    char buf[32];
    for (int e = kPowLo; e <= kPowHi; ++e) {
      std::snprintf(buf, sizeof buf, "1e%d", e);
      t[static_cast<std::size_t>(e - kPowLo)] = std::strtod(buf, nullptr);
    }
    return t;
  }();
  return table;
}

}  // namespace

void validate(const MulqConfig& cfg) {
  if (cfg.sigma < 1 || cfg.sigma > 17) {
    throw ConfigError("quantizer significant-figure count must be in [1, 17]");
  }
}

double pow10_double(int exp) {
  if (exp < kPowLo) return 0.0;
  if (exp > kPowHi) return HUGE_VAL;
  return pow10_table()[static_cast<std::size_t>(exp - kPowLo)];
}

double decimal_value(i128 digits, int scale_exp) {
  if (digits == 0) return 0.0;
  // one correctly rounded decimal-to-binary conversion instead of two partial
  // roundings, so digits * 10^-exp means exactly what it says
  char buf[64];
  const std::string mant = to_string(digits);
  std::snprintf(buf, sizeof buf, "%se%d", mant.c_str(), -scale_exp);
  return std::strtod(buf, nullptr);
}

double QuantizedValue::value() const { return decimal_value(digits, scale_exp); }

int floor_log10_abs(double x) {
  require_finite(x);
  if (x == 0.0) throw ConfigError("floor_log10_abs undefined at zero");
  const Decomposed d = decompose_abs(x);
  int e = static_cast<int>(std::floor(std::log10(std::fabs(x))));
  // The float estimate can be off by one at decade boundaries; fix exactly.
  while (!abs_at_least_pow10(d, e)) --e;
  while (abs_at_least_pow10(d, e + 1)) ++e;
  return e;
}

int scale_exponent(double x, const MulqConfig& cfg) {
  validate(cfg);
  require_finite(x);
  if (x == 0.0) return 0;
  return cfg.sigma - floor_log10_abs(x) - 1;
}

QuantizedValue to_plaintext(double x, const MulqConfig& cfg) {
  validate(cfg);
  require_finite(x);
  QuantizedValue q;
  q.sigma = cfg.sigma;
  if (x == 0.0) return q;

  const int t = scale_exponent(x, cfg);
  const Decomposed d = decompose_abs(x);

  // round-half-away of |x| * 10^t as an exact integer division
  cpp_int num = d.mantissa;
  cpp_int den = 1;
  if (d.exp2 >= 0) {
    num <<= d.exp2;
  } else {
    den <<= -d.exp2;
  }
  if (t >= 0) {
    num *= pow10_cpp(t);
  } else {
    den *= pow10_cpp(-t);
  }
  cpp_int quot = num / den;
  const cpp_int rem = num - quot * den;
  if (2 * rem >= den) ++quot;

  q.digits = quot.convert_to<std::int64_t>();
  if (x < 0) q.digits = -q.digits;
  q.scale_exp = t;
  return q;
}

double quantize(double x, const MulqConfig& cfg) {
  const QuantizedValue q = to_plaintext(x, cfg);
  return q.value();
}

namespace {

// Both sector bounds reduce to the pair of exact comparisons
//   (10^sigma - 5) |x| <= 10^sigma |Q|   and   10^sigma |Q| <= (10^sigma + 5) |x|
// with |x| = m 2^p and |Q| = D 10^-t.
struct SectorSides {
  bool lower = false;
  bool upper = false;
};

SectorSides sector_sides(double x, const MulqConfig& cfg) {
  const QuantizedValue q = to_plaintext(x, cfg);
  const Decomposed d = decompose_abs(x);
  const cpp_int ten_sigma = pow10_cpp(cfg.sigma);
  const cpp_int m = d.mantissa;
  const cpp_int D = q.digits >= 0 ? q.digits : -q.digits;

  SectorSides s;
  s.lower = cmp_scaled((ten_sigma - 5) * m, d.exp2, 0, ten_sigma * D, 0, -q.scale_exp) <= 0;
  s.upper = cmp_scaled(ten_sigma * D, 0, -q.scale_exp, (ten_sigma + 5) * m, d.exp2, 0) <= 0;
  return s;
}

}  // namespace

bool sector_check_a1(double x, const MulqConfig& cfg) {
  validate(cfg);
  require_finite(x);
  if (x == 0.0) return true;
  // (1-h)x^2 <= xQ(x) <= (1+h)x^2; x and Q share sign, so compare magnitudes
  // scaled by |x|.
  const QuantizedValue q = to_plaintext(x, cfg);
  const Decomposed d = decompose_abs(x);
  const cpp_int ten_sigma = pow10_cpp(cfg.sigma);
  const cpp_int m = d.mantissa;
  const cpp_int D = q.digits >= 0 ? q.digits : -q.digits;

  const bool lower =
      cmp_scaled((ten_sigma - 5) * m * m, 2 * d.exp2, 0, ten_sigma * m * D, d.exp2,
                 -q.scale_exp) <= 0;
  const bool upper =
      cmp_scaled(ten_sigma * m * D, d.exp2, -q.scale_exp, (ten_sigma + 5) * m * m,
                 2 * d.exp2, 0) <= 0;
  return lower && upper;
}

bool sector_check_a2(double x, const MulqConfig& cfg) {
  validate(cfg);
  require_finite(x);
  if (x == 0.0) return true;
  const SectorSides s = sector_sides(x, cfg);
  return s.lower && s.upper;
}

bool sector_check_a3(double x, const MulqConfig& cfg) {
  validate(cfg);
  require_finite(x);
  if (x == 0.0) return true;
  return sector_sides(x, cfg).upper;
}

double quantized_product(const QuantizedValue& a, const QuantizedValue& b) {
  const i128 prod = static_cast<i128>(a.digits) * static_cast<i128>(b.digits);
  return decimal_value(prod, a.scale_exp + b.scale_exp);
}

}  // namespace secform::mulq
