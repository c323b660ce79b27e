#include "secform/stability.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "secform/errors.hpp"

namespace secform::stability {

double lyapunov(std::span<const double> e) {
  double s = 0.0;
  for (double v : e) s += v * v;
  return 0.25 * s;
}

double compute_c(double delta, std::span<const double> desired_distances) {
  if (!(delta > 0.0)) throw ConfigError("basin radius must be positive");
  double sum_d2 = 0.0;
  for (double d : desired_distances) sum_d2 += d * d;
  return sum_d2 + std::sqrt(static_cast<double>(desired_distances.size())) * delta;
}

double compute_lambda_max(const graph::FormationGraph& g) {
  const linalg::Mat b = graph::incidence(g);
  // B^T B = gram of B^T
  const linalg::Mat edge_matrix = linalg::gram(linalg::transpose(b));
  const std::vector<double> eig = linalg::jacobi_eigenvalues(edge_matrix);
  return eig.back();
}

double compute_lambda_min(const graph::FormationGraph& g,
                          const graph::FormationState& target_shape) {
  const linalg::Mat r = graph::rigidity_matrix(target_shape, g);
  const linalg::Mat gm = linalg::gram(r);
  const std::vector<double> eig = linalg::jacobi_eigenvalues(gm);
  const double largest = eig.back();
  const double tol = std::max(r.rows, r.cols) *
                     std::numeric_limits<double>::epsilon() * std::max(largest, 0.0);
  if (eig.front() <= tol) {
    throw NotRigid("rigidity Gram matrix is singular at the target shape");
  }
  return eig.front();
}

double compute_k(int sigma, double lambda_min, double lambda_max, double c) {
  if (sigma < 1) throw ConfigError("sigma must be at least 1");
  const double h = 0.5 / std::pow(10.0, sigma - 1);
  return lambda_min - lambda_max * c * (h + h * (1.0 + h));
}

int choose_sigma(const graph::FormationGraph& g, const graph::FormationState& target_shape,
                 double delta, int sigma_cap) {
  const double lmin = compute_lambda_min(g, target_shape);
  const double lmax = compute_lambda_max(g);
  const double c = compute_c(delta, g.desired_distances);
  for (int sigma = 1; sigma <= sigma_cap; ++sigma) {
    if (compute_k(sigma, lmin, lmax, c) > 0.0) return sigma;
  }
  throw ConfigError("no sigma up to the cap yields a positive decay margin");
}

StabilityReport analyze(const graph::FormationGraph& g,
                        const graph::FormationState& target_shape, double delta,
                        int sigma) {
  StabilityReport r;
  r.lambda_min = compute_lambda_min(g, target_shape);
  r.lambda_max = compute_lambda_max(g);
  r.c = compute_c(delta, g.desired_distances);
  r.delta = delta;
  r.sigma = sigma;
  r.k = compute_k(sigma, r.lambda_min, r.lambda_max, r.c);
  return r;
}

std::string StabilityReport::to_text() const {
  std::ostringstream os;
  os.precision(15);
  os << "lambda_min = " << lambda_min << '\n'
     << "lambda_max = " << lambda_max << '\n'
     << "c = " << c << '\n'
     << "delta = " << delta << '\n'
     << "sigma = " << sigma << '\n'
     << "k = " << k << '\n'
     << "decay_certified = " << (decay_certified() ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace secform::stability
