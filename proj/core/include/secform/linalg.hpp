#pragma once

#include <vector>

namespace secform::linalg {

// Minimal dense row-major matrix; everything here is desk scale (a formation
// graph has a handful of agents), so no sparsity or blocking.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
};

Mat multiply(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

// a * a^T
Mat gram(const Mat& a);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Converges when the off-diagonal Frobenius norm drops below
// rel_tol * ||A||_F.
std::vector<double> jacobi_eigenvalues(Mat a, double rel_tol = 1e-12);

// Singular values (descending) via the Gram matrix of the smaller side.
std::vector<double> singular_values(const Mat& a);

// Count of singular values above max(rows, cols) * eps * sigma_max.
int numeric_rank(const Mat& a);

}  // namespace secform::linalg
