#pragma once

#include <span>
#include <utility>
#include <vector>

#include "secform/linalg.hpp"
#include "secform/quantizer.hpp"

namespace secform::graph {

// Undirected sensing graph with one oriented edge per agent pair and the
// prescribed inter-agent distance for each edge.
struct FormationGraph {
  int agent_count = 0;
  std::vector<std::pair<int, int>> edges;  // (tail, head), zero-based
  std::vector<double> desired_distances;

  // Validates: ids in range, no self-loops or duplicate pairs, connected,
  // positive distances.
  static FormationGraph create(int agent_count,
                               std::vector<std::pair<int, int>> edges,
                               std::vector<double> desired_distances);

  int edge_count() const { return static_cast<int>(edges.size()); }

  // +1 when the agent is the edge tail, -1 for the head, 0 otherwise.
  int incidence_sign(int agent, int edge) const;

  std::vector<int> incident_edges(int agent) const;
};

// Stacked planar positions; relative positions and distance errors are always
// recomputed from here, never cached.
struct FormationState {
  std::vector<double> positions;  // 2 * agent_count
};

// z: per-edge tail-minus-head position differences, stacked (length 2|E|).
std::vector<double> relative_positions(const FormationState& state,
                                       const FormationGraph& graph);

// e_k = ||z_k||^2 - d_k^2 per edge.
std::vector<double> distance_errors(const FormationState& state,
                                    const FormationGraph& graph);

// Node-by-edge incidence matrix with one +1 and one -1 per column.
linalg::Mat incidence(const FormationGraph& graph);

// |E| x 2n Jacobian structure: row k carries z_k^T in the tail block and
// -z_k^T in the head block.
linalg::Mat rigidity_matrix(const FormationState& state, const FormationGraph& graph);

// Rank test rank(R(z)) == 2n - 3. Throws DegenerateState when every agent
// occupies the same point.
bool is_infinitesimally_rigid(const FormationState& state, const FormationGraph& graph);

// Pure edge-count test |E| == 2n - 3.
bool is_minimally_rigid(const FormationGraph& graph);

// Gradient control law u_i = -sum_k sign_ik z_k e_k, stacked over agents.
std::vector<double> control_law_exact(const FormationState& state,
                                      const FormationGraph& graph);

// Same law with every z component and every e quantized; per-edge terms are
// exact digit-integer products rescaled once, which is what makes the secure
// pipeline reproduce this function bit-for-bit.
std::vector<double> control_law_quantized(const FormationState& state,
                                          const FormationGraph& graph,
                                          const mulq::MulqConfig& cfg_z,
                                          const mulq::MulqConfig& cfg_e);

}  // namespace secform::graph
