#include "secform/lwe.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "secform/errors.hpp"

namespace secform::lwe {

namespace {

// Residue vector split at the modulus half so dot products against full
// residues accumulate without overflow: v = hi*high + lo with hi, lo < high.
struct SplitVec {
  std::vector<u128> hi;
  std::vector<u128> lo;
};

SplitVec split_residues(std::span<const u128> v, const DecimalModulus& m) {
  SplitVec out;
  out.hi.reserve(v.size());
  out.lo.reserve(v.size());
  for (u128 x : v) {
    out.hi.push_back(x / m.high);
    out.lo.push_back(x % m.high);
  }
  return out;
}

// Whether sum_{j<n} row_j * part_j fits in 128 bits when row_j < q and
// part_j < high.
bool fast_dot_fits(int n, const DecimalModulus& m) {
  const u128 max_term = ~static_cast<u128>(0) / m.q;
  return static_cast<u128>(n) <= max_term / m.high;
}

// (row . v) mod q with v pre-split. Falls back to per-term reduction when the
// accumulate-then-reduce path could overflow.
u128 dot_mod(std::span<const u128> row, const SplitVec& v, const DecimalModulus& m,
             bool fast) {
  if (fast) {
    u128 t_hi = 0, t_lo = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      t_hi += row[j] * v.hi[j];
      t_lo += row[j] * v.lo[j];
    }
    u128 r = mul_mod(t_hi % m.q, m.high % m.q, m);
    r = add_mod(r, t_lo % m.q, m.q);
    return r;
  }
  u128 acc = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const u128 full = add_mod(mul_mod(v.hi[j] % m.q, m.high % m.q, m), v.lo[j] % m.q, m.q);
    acc = add_mod(acc, mul_mod(row[j], full, m), m.q);
  }
  return acc;
}

void require_same_shape(const CipherVec& a, const CipherVec& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.modulus != b.modulus) {
    throw ShapeMismatch("ciphertext shapes or moduli differ: " +
                        std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                        " vs " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  }
}

std::int64_t to_int64_checked(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw ConfigError("decrypted value exceeds 64-bit range");
  }
  return static_cast<std::int64_t>(v);
}

// Signed representative in [-q/2 - w/2, q/2 - w/2). The plaintext set is
// asymmetric (it contains -a/2 but not a/2), so legal payloads w*m + e span
// exactly this window; plain centering into [-q/2, q/2) would mis-decode
// m = -a/2 whenever the injected error is negative.
i128 decryption_representative(u128 x, const LweParams& p) {
  const u128 offset = p.cipher_modulus / 2 + p.scale / 2;
  const u128 shifted = (x + offset) % p.cipher_modulus;
  return static_cast<i128>(shifted) - static_cast<i128>(offset);
}

}  // namespace

LweParams LweParams::create(u128 plain_modulus, u128 cipher_modulus,
                            std::int64_t error_range, int key_length) {
  const int a_exp = power_of_ten_exponent(plain_modulus);
  const int q_exp = power_of_ten_exponent(cipher_modulus);
  if (a_exp < 1) throw ConfigError("plaintext modulus must be a power of ten >= 10");
  if (a_exp > 18) throw ConfigError("plaintext modulus too large for 64-bit plaintexts");
  if (q_exp < 1 || q_exp > 30) throw ConfigError("ciphertext modulus must be a power of ten <= 10^30");
  if (q_exp <= a_exp) throw ConfigError("ciphertext modulus must exceed plaintext modulus");
  if (key_length < 1 || key_length > 4096) throw ConfigError("key length out of range");

  LweParams p;
  p.plain_modulus = plain_modulus;
  p.cipher_modulus = cipher_modulus;
  p.scale = cipher_modulus / plain_modulus;
  p.cipher_digits = q_exp;
  p.key_length = key_length;
  p.mod = DecimalModulus::from_modulus(cipher_modulus);

  if (error_range < 1 || static_cast<u128>(error_range) >= p.scale) {
    throw ConfigError("error range must satisfy 1 <= r < w");
  }
  p.error_range = error_range;
  return p;
}

bool LweParams::in_plaintext_range(std::int64_t v) const {
  const i128 half = static_cast<i128>(plain_modulus / 2);
  return -half <= static_cast<i128>(v) && static_cast<i128>(v) < half;
}

SecretKey keygen(const LweParams& params, RandomSource& rng) {
  SecretKey sk;
  sk.s.reserve(params.key_length);
  for (int i = 0; i < params.key_length; ++i) {
    sk.s.push_back(rng.uniform_residue(params.cipher_modulus));
  }
  return sk;
}

CipherVec encrypt(std::span<const std::int64_t> m, const SecretKey& sk,
                  const LweParams& params, RandomSource& rng) {
  if (static_cast<int>(sk.s.size()) != params.key_length) {
    throw ShapeMismatch("secret key length does not match parameters");
  }
  for (std::int64_t v : m) {
    if (!params.in_plaintext_range(v)) {
      throw PlaintextOutOfRange("plaintext entry " + std::to_string(v) +
                                " outside the signed range of the plaintext space");
    }
  }

  const int n = static_cast<int>(m.size());
  const int cols = params.key_length + 1;
  CipherVec c;
  c.rows = n;
  c.cols = cols;
  c.modulus = params.cipher_modulus;
  c.data.assign(static_cast<std::size_t>(n) * cols, 0);

  const SplitVec key = split_residues(sk.s, params.mod);
  const bool fast = fast_dot_fits(params.key_length, params.mod);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < params.key_length; ++j) {
      c.at(i, j + 1) = rng.uniform_residue(params.cipher_modulus);
    }
    const u128 mask_dot =
        dot_mod({&c.data[static_cast<std::size_t>(i) * cols + 1],
                 static_cast<std::size_t>(params.key_length)},
                key, params.mod, fast);
    const std::int64_t err = rng.signed_uniform(params.error_range);
    const i128 payload = static_cast<i128>(params.scale) * m[i] + err;
    c.at(i, 0) = sub_mod(reduce_signed(payload, params.cipher_modulus), mask_dot,
                         params.cipher_modulus);
  }
  return c;
}

Plaintext decrypt(const CipherVec& c, const SecretKey& sk, const LweParams& params) {
  if (c.cols != params.key_length + 1 || c.modulus != params.cipher_modulus) {
    throw ShapeMismatch("ciphertext does not match parameters");
  }
  // extended key col(1, s)
  std::vector<u128> sbar;
  sbar.reserve(sk.s.size() + 1);
  sbar.push_back(1);
  sbar.insert(sbar.end(), sk.s.begin(), sk.s.end());
  const SplitVec key = split_residues(sbar, params.mod);
  const bool fast = fast_dot_fits(c.cols, params.mod);

  Plaintext m;
  m.reserve(c.rows);
  for (int i = 0; i < c.rows; ++i) {
    const u128 dot = dot_mod(c.row(i), key, params.mod, fast);
    const i128 rep = decryption_representative(dot, params);
    m.push_back(to_int64_checked(round_div_half_away(rep, params.scale)));
  }
  return m;
}

CipherVec add(const CipherVec& c1, const CipherVec& c2) {
  require_same_shape(c1, c2);
  CipherVec out = c1;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = add_mod(c1.data[i], c2.data[i], c1.modulus);
  }
  return out;
}

ResidueMatrix gadget_matrix(int digits, int cols) {
  ResidueMatrix r;
  r.rows = digits * cols;
  r.cols = cols;
  r.data.assign(static_cast<std::size_t>(r.rows) * cols, 0);
  for (int d = 0; d < digits; ++d) {
    const u128 p = pow10_u128(d);
    for (int j = 0; j < cols; ++j) {
      r.at(d * cols + j, j) = p;
    }
  }
  return r;
}

ResidueMatrix gadget_matrix(const LweParams& params) {
  return gadget_matrix(params.cipher_digits, params.key_length + 1);
}

std::vector<u128> digit_decompose(std::span<const u128> row, const LweParams& params) {
  for (u128 v : row) {
    if (v >= params.cipher_modulus) {
      throw InputNotCanonical("entry " + to_string(v) + " is not a canonical residue");
    }
  }
  const int cols = static_cast<int>(row.size());
  std::vector<u128> out(static_cast<std::size_t>(params.cipher_digits) * cols, 0);
  for (int j = 0; j < cols; ++j) {
    u128 v = row[j];
    for (int d = 0; d < params.cipher_digits; ++d) {
      out[static_cast<std::size_t>(d) * cols + j] = v % 10;
      v /= 10;
    }
  }
  return out;
}

CipherMat encrypt2(std::int64_t m, const SecretKey& sk, const LweParams& params,
                   RandomSource& rng) {
  if (!params.in_plaintext_range(m)) {
    throw PlaintextOutOfRange("scalar plaintext " + std::to_string(m) +
                              " outside the signed range of the plaintext space");
  }
  const int rows = params.gadget_rows();
  const int cols = params.key_length + 1;

  const Plaintext zeros(rows, 0);
  const CipherVec zero_enc = encrypt(zeros, sk, params, rng);

  CipherMat out;
  out.rows = rows;
  out.cols = cols;
  out.modulus = params.cipher_modulus;
  out.data = zero_enc.data;

  const u128 m_res = reduce_signed(m, params.cipher_modulus);
  for (int d = 0; d < params.cipher_digits; ++d) {
    const u128 scaled = mul_mod(m_res, pow10_u128(d), params.mod);
    for (int j = 0; j < cols; ++j) {
      u128& cell = out.at(d * cols + j, j);
      cell = add_mod(cell, scaled, params.cipher_modulus);
    }
  }
  return out;
}

CipherVec mult(const CipherMat& m1, const CipherVec& c2, const LweParams& params) {
  if (c2.rows != 1) throw ShapeMismatch("right factor must be a single-row ciphertext");
  if (c2.cols != params.key_length + 1 || m1.cols != c2.cols ||
      m1.rows != params.gadget_rows() || m1.modulus != c2.modulus ||
      m1.modulus != params.cipher_modulus) {
    throw ShapeMismatch("ciphertext product operands do not match parameters");
  }

  const std::vector<u128> digits = digit_decompose(c2.row(0), params);

  // Digits are at most 9, so the whole row-by-matrix product accumulates in
  // 128 bits whenever 9 * q * rows does; checked here, reduced path otherwise.
  const u128 max_acc = ~static_cast<u128>(0);
  const bool fast =
      static_cast<u128>(m1.rows) <= max_acc / (params.cipher_modulus * 9);

  CipherVec out;
  out.rows = 1;
  out.cols = m1.cols;
  out.modulus = params.cipher_modulus;
  out.data.assign(m1.cols, 0);

  for (int c = 0; c < m1.cols; ++c) {
    if (fast) {
      u128 acc = 0;
      for (int r = 0; r < m1.rows; ++r) {
        acc += digits[r] * m1.at(r, c);
      }
      out.data[c] = acc % params.cipher_modulus;
    } else {
      u128 acc = 0;
      for (int r = 0; r < m1.rows; ++r) {
        acc = add_mod(acc, (digits[r] * m1.at(r, c)) % params.cipher_modulus,
                      params.cipher_modulus);
      }
      out.data[c] = acc;
    }
  }
  return out;
}

ErrorBudget check_add_budget(const LweParams& params) {
  ErrorBudget b;
  b.context = BudgetContext::Add;
  // two injected errors of magnitude <= r/2 each
  b.twice_worst_error = static_cast<u128>(params.error_range) * 2;
  b.limit = params.scale;
  return b;
}

ErrorBudget check_mult_budget(u128 m1_bound, const LweParams& params) {
  ErrorBudget b;
  b.context = BudgetContext::Mult;
  const u128 r = static_cast<u128>(params.error_range);
  // |m1*e2 + D(c2)*e1| <= m1_bound*(r/2) + 9*(r/2)*gadget_rows; the pass
  // condition doubles both sides of "< w/2" to stay in integers.
  b.twice_worst_error =
      m1_bound * r + static_cast<u128>(9) * r * static_cast<u128>(params.gadget_rows());
  b.limit = params.scale;
  return b;
}

namespace {

void write_matrix(std::ostream& os, int rows, int cols, u128 modulus,
                  const std::vector<u128>& data, const char* form) {
  os << rows << ' ' << cols - 1 << ' ' << to_string(modulus) << ' ' << form << '\n';
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (j) os << ' ';
      os << to_string(data[static_cast<std::size_t>(i) * cols + j]);
    }
    os << '\n';
  }
}

void read_matrix(std::istream& is, int& rows, int& cols, u128& modulus,
                 std::vector<u128>& data, std::string& form) {
  int n = 0, key_len = 0;
  std::string q_text;
  if (!(is >> n >> key_len >> q_text >> form)) {
    throw ParseError("truncated ciphertext header");
  }
  if (n <= 0 || key_len < 0 || n > 10'000'000 || key_len > 100'000) {
    throw ParseError("bad ciphertext dimensions");
  }
  modulus = parse_u128(q_text);
  rows = n;
  cols = key_len + 1;
  data.resize(static_cast<std::size_t>(rows) * cols);
  std::string tok;
  for (auto& cell : data) {
    if (!(is >> tok)) throw ParseError("truncated ciphertext body");
    cell = parse_u128(tok);
    if (cell >= modulus) throw ParseError("ciphertext entry not a canonical residue");
  }
}

}  // namespace

void write_cipher(std::ostream& os, const CipherVec& c) {
  write_matrix(os, c.rows, c.cols, c.modulus, c.data, "Enc");
}

void write_cipher(std::ostream& os, const CipherMat& c) {
  write_matrix(os, c.rows, c.cols, c.modulus, c.data, "Enc2");
}

CipherVec read_cipher_vec(std::istream& is) {
  CipherVec c;
  std::string form;
  read_matrix(is, c.rows, c.cols, c.modulus, c.data, form);
  if (form != "Enc") throw ParseError("expected an Enc record, got '" + form + "'");
  return c;
}

CipherMat read_cipher_mat(std::istream& is) {
  CipherMat c;
  std::string form;
  read_matrix(is, c.rows, c.cols, c.modulus, c.data, form);
  if (form != "Enc2") throw ParseError("expected an Enc2 record, got '" + form + "'");
  const int digits = power_of_ten_exponent(c.modulus);
  if (digits < 1 || c.rows != digits * c.cols) {
    throw ParseError("Enc2 record has inconsistent gadget dimensions");
  }
  return c;
}

void write_secret_key(std::ostream& os, const SecretKey& sk) {
  for (std::size_t i = 0; i < sk.s.size(); ++i) {
    if (i) os << ' ';
    os << to_string(sk.s[i]);
  }
  os << '\n';
}

SecretKey read_secret_key(std::istream& is, int key_length) {
  SecretKey sk;
  sk.s.reserve(key_length);
  std::string tok;
  for (int i = 0; i < key_length; ++i) {
    if (!(is >> tok)) throw ParseError("truncated secret key");
    sk.s.push_back(parse_u128(tok));
  }
  return sk;
}

}  // namespace secform::lwe
