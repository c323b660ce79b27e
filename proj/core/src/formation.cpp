#include "secform/formation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "secform/errors.hpp"

namespace secform::graph {

FormationGraph FormationGraph::create(int agent_count,
                                      std::vector<std::pair<int, int>> edges,
                                      std::vector<double> desired_distances) {
  if (agent_count < 2) throw ConfigError("a formation needs at least two agents");
  if (edges.empty()) throw ConfigError("a formation needs at least one edge");
  if (edges.size() != desired_distances.size()) {
    throw ConfigError("edge list and distance list lengths differ");
  }

  std::set<std::pair<int, int>> seen;
  for (const auto& [tail, head] : edges) {
    if (tail < 0 || tail >= agent_count || head < 0 || head >= agent_count) {
      throw ConfigError("edge endpoint out of range");
    }
    if (tail == head) throw ConfigError("self-loop edges are not allowed");
    const auto key = std::minmax(tail, head);
    if (!seen.insert({key.first, key.second}).second) {
      throw ConfigError("duplicate edge between agents " + std::to_string(tail + 1) +
                        " and " + std::to_string(head + 1));
    }
  }
  for (double d : desired_distances) {
    if (!(d > 0.0)) throw ConfigError("desired distances must be positive");
  }

  // connectivity
  std::vector<std::vector<int>> adj(agent_count);
  for (const auto& [tail, head] : edges) {
    adj[tail].push_back(head);
    adj[head].push_back(tail);
  }
  std::vector<bool> visited(agent_count, false);
  std::vector<int> stack{0};
  visited[0] = true;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!visited[w]) {
        visited[w] = true;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached != agent_count) throw ConfigError("formation graph must be connected");

  FormationGraph g;
  g.agent_count = agent_count;
  g.edges = std::move(edges);
  g.desired_distances = std::move(desired_distances);
  return g;
}

int FormationGraph::incidence_sign(int agent, int edge) const {
  const auto& [tail, head] = edges[static_cast<std::size_t>(edge)];
  if (agent == tail) return 1;
  if (agent == head) return -1;
  return 0;
}

std::vector<int> FormationGraph::incident_edges(int agent) const {
  std::vector<int> out;
  for (int k = 0; k < edge_count(); ++k) {
    if (incidence_sign(agent, k) != 0) out.push_back(k);
  }
  return out;
}

namespace {

void require_state(const FormationState& state, const FormationGraph& graph) {
  if (static_cast<int>(state.positions.size()) != 2 * graph.agent_count) {
    throw ShapeMismatch("state has " + std::to_string(state.positions.size()) +
                        " coordinates for " + std::to_string(graph.agent_count) +
                        " agents");
  }
}

}  // namespace

std::vector<double> relative_positions(const FormationState& state,
                                       const FormationGraph& graph) {
  require_state(state, graph);
  std::vector<double> z(2 * static_cast<std::size_t>(graph.edge_count()));
  for (int k = 0; k < graph.edge_count(); ++k) {
    const auto& [tail, head] = graph.edges[static_cast<std::size_t>(k)];
    z[2 * k] = state.positions[2 * tail] - state.positions[2 * head];
    z[2 * k + 1] = state.positions[2 * tail + 1] - state.positions[2 * head + 1];
  }
  return z;
}

std::vector<double> distance_errors(const FormationState& state,
                                    const FormationGraph& graph) {
  const std::vector<double> z = relative_positions(state, graph);
  std::vector<double> e(graph.edge_count());
  for (int k = 0; k < graph.edge_count(); ++k) {
    const double d = graph.desired_distances[static_cast<std::size_t>(k)];
    e[k] = (z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1]) - d * d;
  }
  return e;
}

linalg::Mat incidence(const FormationGraph& graph) {
  linalg::Mat b(graph.agent_count, graph.edge_count());
  for (int k = 0; k < graph.edge_count(); ++k) {
    const auto& [tail, head] = graph.edges[static_cast<std::size_t>(k)];
    b(tail, k) = 1.0;
    b(head, k) = -1.0;
  }
  return b;
}

linalg::Mat rigidity_matrix(const FormationState& state, const FormationGraph& graph) {
  require_state(state, graph);
  const std::vector<double> z = relative_positions(state, graph);
  linalg::Mat r(graph.edge_count(), 2 * graph.agent_count);
  for (int k = 0; k < graph.edge_count(); ++k) {
    const auto& [tail, head] = graph.edges[static_cast<std::size_t>(k)];
    r(k, 2 * tail) = z[2 * k];
    r(k, 2 * tail + 1) = z[2 * k + 1];
    r(k, 2 * head) = -z[2 * k];
    r(k, 2 * head + 1) = -z[2 * k + 1];
  }
  return r;
}

bool is_infinitesimally_rigid(const FormationState& state, const FormationGraph& graph) {
  require_state(state, graph);
  bool coincide = true;
  for (int i = 1; i < graph.agent_count && coincide; ++i) {
    coincide = state.positions[2 * i] == state.positions[0] &&
               state.positions[2 * i + 1] == state.positions[1];
  }
  if (coincide) throw DegenerateState("all agent positions coincide");
  const int rank = linalg::numeric_rank(rigidity_matrix(state, graph));
  return rank == 2 * graph.agent_count - 3;
}

bool is_minimally_rigid(const FormationGraph& graph) {
  return graph.edge_count() == 2 * graph.agent_count - 3;
}

std::vector<double> control_law_exact(const FormationState& state,
                                      const FormationGraph& graph) {
  const std::vector<double> z = relative_positions(state, graph);
  const std::vector<double> e = distance_errors(state, graph);
  std::vector<double> u(2 * static_cast<std::size_t>(graph.agent_count), 0.0);
  for (int k = 0; k < graph.edge_count(); ++k) {
    const auto& [tail, head] = graph.edges[static_cast<std::size_t>(k)];
    const double tx = z[2 * k] * e[k];
    const double ty = z[2 * k + 1] * e[k];
    u[2 * tail] -= tx;
    u[2 * tail + 1] -= ty;
    u[2 * head] += tx;
    u[2 * head + 1] += ty;
  }
  return u;
}

std::vector<double> control_law_quantized(const FormationState& state,
                                          const FormationGraph& graph,
                                          const mulq::MulqConfig& cfg_z,
                                          const mulq::MulqConfig& cfg_e) {
  const std::vector<double> z = relative_positions(state, graph);
  const std::vector<double> e = distance_errors(state, graph);
  std::vector<double> u(2 * static_cast<std::size_t>(graph.agent_count), 0.0);
  for (int k = 0; k < graph.edge_count(); ++k) {
    const auto& [tail, head] = graph.edges[static_cast<std::size_t>(k)];
    const mulq::QuantizedValue qe = mulq::to_plaintext(e[k], cfg_e);
    const mulq::QuantizedValue qz0 = mulq::to_plaintext(z[2 * k], cfg_z);
    const mulq::QuantizedValue qz1 = mulq::to_plaintext(z[2 * k + 1], cfg_z);
    const double tx = mulq::quantized_product(qz0, qe);
    const double ty = mulq::quantized_product(qz1, qe);
    u[2 * tail] -= tx;
    u[2 * tail + 1] -= ty;
    u[2 * head] += tx;
    u[2 * head + 1] += ty;
  }
  return u;
}

}  // namespace secform::graph
