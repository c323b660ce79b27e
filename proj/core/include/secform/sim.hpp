#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "secform/formation.hpp"
#include "secform/pipeline.hpp"
#include "secform/stability.hpp"

namespace secform::sim {

enum class Mode { Exact, Quantized, Secure };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

// Reference constants attached to a scenario from prior published runs of the
// same setup; the manifest reports computed values and flags any mismatch
// against these instead of silently adopting them.
struct ScenarioReference {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double c = 0.0;
};

struct SimConfig {
  std::string scenario = "custom";
  graph::FormationGraph graph;

  // Target shape realizing the desired distances; required for the stability
  // report and for perturbed initial conditions.
  std::vector<double> target_positions;

  // Explicit initial positions, or (when empty) target perturbed by uniform
  // noise with rejection outside the basin.
  std::vector<double> initial_positions;
  double perturbation = 0.3;
  double basin_delta = 2.7;

  double dt = 0.01;
  double t_end = 30.0;
  int sigma_z = 4;
  int sigma_e = 4;
  lwe::LweParams params;
  Mode mode = Mode::Secure;
  std::uint64_t seed = 1;

  std::string csv_path;
  std::string manifest_path;
  std::string trace_path;

  std::optional<ScenarioReference> reference;
};

// One sample per integration step: pre-step measurements plus the command
// applied at that step.
struct TrajectoryRecord {
  double t = 0.0;
  std::vector<double> positions;
  std::vector<double> errors;
  double lyapunov = 0.0;
  std::vector<double> command;
  bool pipeline_equiv = true;  // secure mode only; vacuously true otherwise
};

struct RunSummary {
  int steps = 0;
  double final_error_norm = 0.0;
  bool converged = false;         // final ||e|| below kConvergenceNorm
  double fitted_rate = 0.0;       // semilog slope of ||e(t)|| over the clean tail
  bool rate_available = false;
  bool lyapunov_monotone = true;  // non-increasing after entering the basin,
                                  // above the double-precision floor
  double centroid_drift = 0.0;
  bool pipeline_equiv_all = true;
  bool entered_basin = false;
  bool report_available = false;  // a target shape was given to analyze
  stability::StabilityReport report;
  bool decay_warning = false;     // k <= 0 for the configured sigma_e
};

inline constexpr double kConvergenceNorm = 1e-6;

// Below this Lyapunov value the positions sit at their double-precision
// equilibrium and V can jitter by representation noise; the monotonicity
// check stops here (six decades below the convergence threshold).
inline constexpr double kLyapunovFloor = 1e-24;

// Drives one closed-loop simulation; owns the key session and all randomness.
class Simulator {
 public:
  explicit Simulator(const SimConfig& config);

  // One explicit-Euler step; returns the record for the pre-step state.
  TrajectoryRecord step(graph::FormationState& state, double t);

  const SimConfig& config() const { return config_; }
  const pipeline::KeySession& session() const { return session_; }
  pipeline::Trace* trace() { return trace_enabled_ ? &trace_ : nullptr; }

 private:
  SimConfig config_;
  pipeline::KeySession session_;
  pipeline::EdgeContext edge_;
  Mt19937Source enc_rng_;
  bool trace_enabled_ = false;
  pipeline::Trace trace_;
};

// Full run: initial conditions, stability report, integration, CSV, manifest,
// optional trace file.
RunSummary run(const SimConfig& config, std::vector<TrajectoryRecord>* records = nullptr);

// The built-in four-agent square scenario with its published reference
// constants.
SimConfig demo_square();

// Flat key = value configuration with [graph] / [encryption] / [simulation] /
// [output] sections; see the README for the grammar.
SimConfig load_config(std::istream& is);
SimConfig load_config_file(const std::string& path);

std::uint64_t config_hash(const SimConfig& config);
std::string manifest_text(const SimConfig& config, const RunSummary& summary);

void write_csv(std::ostream& os, const SimConfig& config,
               const std::vector<TrajectoryRecord>& records);

}  // namespace secform::sim
