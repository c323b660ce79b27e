#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "secform/residue.hpp"
#include "secform/rng.hpp"

namespace secform::lwe {

// Parameter set for the symmetric-key scheme over Z_q with q = w * a.
// The plaintext space is the signed half-open set [a] = {b : -a/2 <= b < a/2};
// w absorbs the injected noise, so decryption divides the centered residue by
// w and rounds half away from zero.
struct LweParams {
  u128 plain_modulus = 0;        // a, power of ten
  u128 cipher_modulus = 0;       // q = w * a, power of ten
  u128 scale = 0;                // w = q / a, power of ten
  std::int64_t error_range = 0;  // r; injected errors are uniform over [r]
  int key_length = 0;            // N
  int cipher_digits = 0;         // log10(q)
  DecimalModulus mod;

  // Validates a, q powers of ten with q = w*a, r < w, N >= 1, and sizes for
  // which all internal arithmetic is exact.
  static LweParams create(u128 plain_modulus, u128 cipher_modulus,
                          std::int64_t error_range, int key_length);

  int gadget_rows() const { return cipher_digits * (key_length + 1); }
  bool in_plaintext_range(std::int64_t v) const;
};

struct SecretKey {
  std::vector<u128> s;  // length N, canonical residues
};

using Plaintext = std::vector<std::int64_t>;

// Ciphertext of a length-n vector: n x (N+1); column 0 carries the masked
// payload, columns 1..N the uniform mask.
struct CipherVec {
  int rows = 0;
  int cols = 0;  // N + 1
  u128 modulus = 0;
  std::vector<u128> data;

  u128& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  u128 at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const u128> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
};

// Scalar ciphertext in the gadget form used as the left factor of the
// ciphertext product: log10(q)*(N+1) x (N+1).
struct CipherMat {
  int rows = 0;
  int cols = 0;
  u128 modulus = 0;
  std::vector<u128> data;

  u128& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  u128 at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

// Plain residue matrix (used for the gadget matrix).
struct ResidueMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<u128> data;

  u128& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  u128 at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

enum class BudgetContext { Add, Mult };

// Worst-case rounding-error account for one homomorphic operation. The
// decryption rounding is exact iff the accumulated injected error stays below
// w/2 in magnitude, i.e. twice_worst_error < limit.
struct ErrorBudget {
  BudgetContext context = BudgetContext::Add;
  u128 twice_worst_error = 0;
  u128 limit = 0;

  bool pass() const { return twice_worst_error < limit; }
};

SecretKey keygen(const LweParams& params, RandomSource& rng);

// [(-A s + w m + e) mod q | A] with A uniform and e uniform over [r]^n.
// Throws PlaintextOutOfRange when any entry leaves [a].
CipherVec encrypt(std::span<const std::int64_t> m, const SecretKey& sk,
                  const LweParams& params, RandomSource& rng);

// round((M sbar mod q) / w) element-wise with round-half-away-from-zero,
// after reducing the residue to the signed window [-q/2 - w/2, q/2 - w/2)
// that exactly covers every legal payload w*m + e. Never fails structurally;
// out-of-range inputs decode to whatever the window yields.
Plaintext decrypt(const CipherVec& c, const SecretKey& sk, const LweParams& params);

CipherVec add(const CipherVec& c1, const CipherVec& c2);

// col(10^0, ..., 10^(digits-1)) (x) I_cols; satisfies decompose(c) * R = c.
ResidueMatrix gadget_matrix(int digits, int cols);
ResidueMatrix gadget_matrix(const LweParams& params);

// Base-10 digit decomposition, least-significant digit first, entries in 0..9.
// Throws InputNotCanonical if any entry is >= q.
std::vector<u128> digit_decompose(std::span<const u128> row, const LweParams& params);

// m * R + Enc(0-vector); the left factor of the ciphertext product.
CipherMat encrypt2(std::int64_t m, const SecretKey& sk, const LweParams& params,
                   RandomSource& rng);

// decompose(c2 row) * M1; decrypts to m1*m2 while the budget holds.
CipherVec mult(const CipherMat& m1, const CipherVec& c2, const LweParams& params);

ErrorBudget check_add_budget(const LweParams& params);
ErrorBudget check_mult_budget(u128 m1_bound, const LweParams& params);

// Text serialization: a 4-field header "n N q form" followed by the rows in
// row-major decimal.
void write_cipher(std::ostream& os, const CipherVec& c);
void write_cipher(std::ostream& os, const CipherMat& c);
CipherVec read_cipher_vec(std::istream& is);
CipherMat read_cipher_mat(std::istream& is);

void write_secret_key(std::ostream& os, const SecretKey& sk);
SecretKey read_secret_key(std::istream& is, int key_length);

}  // namespace secform::lwe
