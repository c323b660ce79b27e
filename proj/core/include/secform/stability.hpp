#pragma once

#include <span>
#include <string>

#include "secform/formation.hpp"

namespace secform::stability {

// Certified decay constants for the quantized gradient loop on a basin of
// radius delta around the zero-error equilibrium.
struct StabilityReport {
  double lambda_min = 0.0;  // smallest eigenvalue of the rigidity Gram matrix at the target shape
  double lambda_max = 0.0;  // largest eigenvalue of the edge matrix B^T B
  double c = 0.0;           // bound on ||z||^2 over the basin
  double delta = 0.0;       // basin radius (in error norm)
  int sigma = 0;            // significant figures under test
  double k = 0.0;           // decay margin

  bool decay_certified() const { return k > 0.0; }
  std::string to_text() const;  // key = value lines
};

// V = (1/4) e^T e.
double lyapunov(std::span<const double> e);

// c = sum d_k^2 + sqrt(|E|) * delta, the closed-form bound on ||z||^2 over
// ||e|| <= delta obtained from ||z||^2 = sum |e_k + d_k^2|.
double compute_c(double delta, std::span<const double> desired_distances);

// Largest eigenvalue of B^T B (the planar lift shares its nonzero spectrum).
double compute_lambda_max(const graph::FormationGraph& g);

// Smallest eigenvalue of R(z) R(z)^T at the target shape. Throws NotRigid when
// the Gram matrix is singular beyond the rank tolerance.
double compute_lambda_min(const graph::FormationGraph& g,
                          const graph::FormationState& target_shape);

// k = lambda_min - lambda_max * c * (h + h(1+h)), h = 0.5/10^(sigma-1).
double compute_k(int sigma, double lambda_min, double lambda_max, double c);

// Smallest sigma with k > 0; the margin is monotone in sigma and approaches
// lambda_min, so this terminates for any rigid target shape.
int choose_sigma(const graph::FormationGraph& g, const graph::FormationState& target_shape,
                 double delta, int sigma_cap = 32);

StabilityReport analyze(const graph::FormationGraph& g,
                        const graph::FormationState& target_shape, double delta,
                        int sigma);

}  // namespace secform::stability
