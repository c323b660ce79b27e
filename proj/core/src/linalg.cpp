#include "secform/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "secform/errors.hpp"

namespace secform::linalg {

Mat multiply(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw ShapeMismatch("matrix product dimension mismatch");
  Mat out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  return out;
}

Mat transpose(const Mat& a) {
  Mat out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      out(j, i) = a(i, j);
    }
  }
  return out;
}

Mat gram(const Mat& a) {
  Mat out(a.rows, a.rows);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = i; j < a.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += a(i, k) * a(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

namespace {

double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

double frobenius_norm(const Mat& a) {
  double s = 0.0;
  for (double x : a.v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> jacobi_eigenvalues(Mat a, double rel_tol) {
  if (a.rows != a.cols) throw ShapeMismatch("eigensolver needs a square matrix");
  const int n = a.rows;
  if (n == 0) return {};
  if (n == 1) return {a(0, 0)};

  const double norm = frobenius_norm(a);
  const double threshold = rel_tol * (norm > 0.0 ? norm : 1.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_diagonal_norm(a) < threshold) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = arp - s * (arq + tau * arp);
          a(p, r) = a(r, p);
          a(r, q) = arq + s * (arp - tau * arq);
          a(q, r) = a(r, q);
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

std::vector<double> singular_values(const Mat& a) {
  const Mat g = a.rows <= a.cols ? gram(a) : gram(transpose(a));
  std::vector<double> eig = jacobi_eigenvalues(g);
  std::vector<double> sv;
  sv.reserve(eig.size());
  for (auto it = eig.rbegin(); it != eig.rend(); ++it) {
    sv.push_back(std::sqrt(std::max(0.0, *it)));
  }
  return sv;
}

int numeric_rank(const Mat& a) {
  const std::vector<double> sv = singular_values(a);
  if (sv.empty()) return 0;
  const double tol = std::max(a.rows, a.cols) *
                     std::numeric_limits<double>::epsilon() * sv.front();
  int rank = 0;
  for (double s : sv) {
    if (s > tol) ++rank;
  }
  return rank;
}

}  // namespace secform::linalg
