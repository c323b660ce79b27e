#pragma once

// Independent reference implementations used only by tests. Each one takes a
// deliberately different route than the library (double-and-add instead of
// split multiplication, elimination instead of eigenvalues, exact integer
// characteristic polynomials instead of iteration) so agreement is meaningful.

#include <cmath>
#include <functional>
#include <vector>

#include "secform/linalg.hpp"
#include "secform/lwe.hpp"
#include "secform/residue.hpp"

namespace oracles {

using secform::i128;
using secform::u128;

// Russian-peasant modular product; correct for any q < 2^127.
inline u128 peasant_mul_mod(u128 a, u128 b, u128 q) {
  a %= q;
  u128 acc = 0;
  while (b > 0) {
    if (b & 1) {
      acc += a;
      if (acc >= q) acc -= q;
    }
    a += a;
    if (a >= q) a -= q;
    b >>= 1;
  }
  return acc;
}

// Signed wrap into the half-open set {b : -a/2 <= b < a/2}.
inline i128 center_wrap(i128 v, i128 a) {
  const i128 half = a / 2;
  i128 r = (v + half) % a;
  if (r < 0) r += a;
  return r - half;
}

// The signed payload window used by decryption: [-q/2 - w/2, q/2 - w/2),
// which exactly covers w*m + e for the asymmetric plaintext set.
inline i128 payload_representative(u128 x, const secform::lwe::LweParams& p) {
  const u128 offset = p.cipher_modulus / 2 + p.scale / 2;
  const u128 shifted = (x + offset) % p.cipher_modulus;
  return static_cast<i128>(shifted) - static_cast<i128>(offset);
}

// Decryption re-derived from scratch with the peasant product.
inline std::vector<i128> reference_decrypt(const secform::lwe::CipherVec& c,
                                           const secform::lwe::SecretKey& sk,
                                           const secform::lwe::LweParams& p) {
  std::vector<u128> sbar{1};
  sbar.insert(sbar.end(), sk.s.begin(), sk.s.end());
  std::vector<i128> out;
  for (int i = 0; i < c.rows; ++i) {
    u128 dot = 0;
    for (int j = 0; j < c.cols; ++j) {
      dot = (dot + peasant_mul_mod(c.at(i, j), sbar[static_cast<std::size_t>(j)],
                                   p.cipher_modulus)) %
            p.cipher_modulus;
    }
    const i128 rep = payload_representative(dot, p);
    const i128 w = static_cast<i128>(p.scale);
    const i128 m = rep >= 0 ? (rep + w / 2) / w : -((-rep + w / 2) / w);
    out.push_back(m);
  }
  return out;
}

// Recovers the injected error of a ciphertext given the plaintext it should
// carry: e_i = payload(row . sbar) - w * m_i.
inline std::vector<i128> extract_errors(const secform::lwe::CipherVec& c,
                                        const secform::lwe::SecretKey& sk,
                                        const secform::lwe::LweParams& p,
                                        const std::vector<i128>& m) {
  std::vector<u128> sbar{1};
  sbar.insert(sbar.end(), sk.s.begin(), sk.s.end());
  std::vector<i128> errs;
  for (int i = 0; i < c.rows; ++i) {
    u128 dot = 0;
    for (int j = 0; j < c.cols; ++j) {
      dot = (dot + peasant_mul_mod(c.at(i, j), sbar[static_cast<std::size_t>(j)],
                                   p.cipher_modulus)) %
            p.cipher_modulus;
    }
    const i128 payload = payload_representative(dot, p);
    errs.push_back(payload - static_cast<i128>(p.scale) * m[static_cast<std::size_t>(i)]);
  }
  return errs;
}

// Characteristic polynomial of an integer-valued matrix by the
// Faddeev-LeVerrier recurrence carried in exact 128-bit integers. Returns
// [1, c1, ..., cn] for lambda^n + c1 lambda^(n-1) + ... + cn.
inline std::vector<i128> charpoly_int(const secform::linalg::Mat& a) {
  const int n = a.rows;
  std::vector<std::vector<i128>> A(n, std::vector<i128>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      A[i][j] = static_cast<i128>(std::llround(a(i, j)));
    }
  }
  std::vector<std::vector<i128>> M(n, std::vector<i128>(n, 0));
  std::vector<i128> coeffs{1};
  i128 ck = 1;
  for (int k = 1; k <= n; ++k) {
    // M <- A (M + c_{k-1} I)
    std::vector<std::vector<i128>> next(n, std::vector<i128>(n, 0));
    for (int i = 0; i < n; ++i) M[i][i] += ck;
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < n; ++l) {
        const i128 ail = A[i][l];
        if (ail == 0) continue;
        for (int j = 0; j < n; ++j) next[i][j] += ail * M[l][j];
      }
    }
    M = next;
    i128 tr = 0;
    for (int i = 0; i < n; ++i) tr += M[i][i];
    ck = -tr / k;  // exact for integer matrices
    coeffs.push_back(ck);
  }
  return coeffs;
}

// Numeric rank by Gaussian elimination with partial pivoting.
inline int gauss_rank(secform::linalg::Mat a, double rel_tol = 1e-10) {
  double scale = 0.0;
  for (double v : a.v) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return 0;
  const double tol = rel_tol * scale;
  int rank = 0;
  int row = 0;
  for (int col = 0; col < a.cols && row < a.rows; ++col) {
    int pivot = row;
    for (int r = row + 1; r < a.rows; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
    }
    if (std::fabs(a(pivot, col)) <= tol) continue;
    for (int c = 0; c < a.cols; ++c) std::swap(a(row, c), a(pivot, c));
    for (int r = row + 1; r < a.rows; ++r) {
      const double f = a(r, col) / a(row, col);
      for (int c = col; c < a.cols; ++c) a(r, c) -= f * a(row, c);
    }
    ++rank;
    ++row;
  }
  return rank;
}

// Central finite differences of a scalar field.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f(x);
    x[i] = saved - h;
    const double fm = f(x);
    x[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace oracles
