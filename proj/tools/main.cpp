#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "secform/errors.hpp"
#include "secform/pipeline.hpp"
#include "secform/sim.hpp"

namespace {

namespace fs = std::filesystem;
using secform::sim::SimConfig;

// exit codes: 0 ok, 1 usage/config/IO error, 2 verification or precondition failure
constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kCheckFailed = 2;

std::string default_out_dir() {
  if (const char* env = std::getenv("SECFORM_OUT_DIR")) return env;
  return ".";
}

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<int> sigma_z;
  std::optional<int> sigma_e;
  std::optional<std::string> mode;
  std::optional<std::string> csv;
  std::optional<std::string> manifest;
  std::optional<std::string> trace;
  std::string out_dir = default_out_dir();
};

void add_override_flags(CLI::App* cmd, RunOverrides& o) {
  cmd->add_option("--seed", o.seed, "Seed for all randomness");
  cmd->add_option("--dt", o.dt, "Integration step size");
  cmd->add_option("--t-end", o.t_end, "Simulation horizon");
  cmd->add_option("--sigma-z", o.sigma_z, "Significant figures for relative positions");
  cmd->add_option("--sigma-e", o.sigma_e, "Significant figures for distance errors");
  cmd->add_option("--mode", o.mode, "Loop mode: exact, quantized, or secure");
  cmd->add_option("--csv", o.csv, "Trajectory CSV path");
  cmd->add_option("--manifest", o.manifest, "Manifest path");
  cmd->add_option("--trace", o.trace, "Record the encrypted dataflow to this file");
  cmd->add_option("--out-dir", o.out_dir,
                  "Directory for default outputs (or env SECFORM_OUT_DIR)");
}

void apply_overrides(SimConfig& config, const RunOverrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.dt) config.dt = *o.dt;
  if (o.t_end) config.t_end = *o.t_end;
  if (o.sigma_z) config.sigma_z = *o.sigma_z;
  if (o.sigma_e) config.sigma_e = *o.sigma_e;
  if (o.mode) config.mode = secform::sim::mode_from_string(*o.mode);
  if (o.csv) config.csv_path = *o.csv;
  if (o.manifest) config.manifest_path = *o.manifest;
  if (o.trace) config.trace_path = *o.trace;
  if (config.csv_path.empty()) {
    config.csv_path = (fs::path(o.out_dir) / "trajectory.csv").string();
  }
  if (config.manifest_path.empty()) {
    config.manifest_path = (fs::path(o.out_dir) / "manifest.txt").string();
  }
}

int run_simulation(SimConfig config) {
  const secform::sim::RunSummary summary = secform::sim::run(config);
  std::cout << secform::sim::manifest_text(config, summary);
  if (summary.decay_warning) {
    std::cerr << "warning: decay margin k <= 0 at sigma_e = " << config.sigma_e
              << "; convergence is not certified\n";
  }
  return kOk;
}

int analyze(const std::optional<std::string>& config_path) {
  SimConfig config = config_path ? secform::sim::load_config_file(*config_path)
                                 : secform::sim::demo_square();
  if (config.target_positions.empty()) {
    std::cerr << "error: the configuration has no target shape to analyze\n";
    return kError;
  }
  secform::graph::FormationState target{config.target_positions};
  const secform::stability::StabilityReport report = secform::stability::analyze(
      config.graph, target, config.basin_delta, config.sigma_e);
  std::cout << "scenario = " << config.scenario << '\n' << report.to_text();
  if (config.reference) {
    std::cout << "lambda_min_reference = " << config.reference->lambda_min << '\n'
              << "lambda_max_reference = " << config.reference->lambda_max << '\n'
              << "c_reference = " << config.reference->c << '\n';
  }
  std::cout << "suggested_sigma = "
            << secform::stability::choose_sigma(config.graph, target, config.basin_delta)
            << '\n';
  return kOk;
}

int verify(const std::string& trace_path) {
  std::ifstream is(trace_path);
  if (!is) {
    std::cerr << "error: cannot open trace '" << trace_path << "'\n";
    return kError;
  }
  const secform::pipeline::Trace trace = secform::pipeline::read_trace(is);
  const secform::pipeline::VerifyReport report = secform::pipeline::verify_trace(trace);
  std::cout << "steps_checked = " << report.steps_checked << '\n'
            << "issues = " << report.issues.size() << '\n';
  for (const std::string& issue : report.issues) {
    std::cout << "issue: " << issue << '\n';
  }
  if (!report.ok()) {
    std::cerr << "verification failed: the recorded dataflow does not reproduce\n";
    return kCheckFailed;
  }
  std::cout << "verified: pipeline output matches the quantized control law\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted distributed formation control simulator"};
  app.require_subcommand(1);

  std::string config_path;
  RunOverrides run_opts;
  CLI::App* cmd_run = app.add_subcommand("run", "Simulate from a configuration file");
  cmd_run->add_option("--config", config_path, "Configuration file")->required();
  add_override_flags(cmd_run, run_opts);

  RunOverrides demo_opts;
  CLI::App* cmd_demo =
      app.add_subcommand("demo-square", "Built-in four-agent square scenario");
  add_override_flags(cmd_demo, demo_opts);

  std::optional<std::string> analyze_config;
  CLI::App* cmd_analyze =
      app.add_subcommand("analyze", "Print the stability report without simulating");
  cmd_analyze->add_option("--config", analyze_config, "Configuration file (default: demo)");

  std::string trace_path;
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "Replay a recorded trace and re-check every stage");
  cmd_verify->add_option("--trace", trace_path, "Trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      SimConfig config = secform::sim::load_config_file(config_path);
      apply_overrides(config, run_opts);
      return run_simulation(std::move(config));
    }
    if (cmd_demo->parsed()) {
      SimConfig config = secform::sim::demo_square();
      apply_overrides(config, demo_opts);
      return run_simulation(std::move(config));
    }
    if (cmd_analyze->parsed()) return analyze(analyze_config);
    if (cmd_verify->parsed()) return verify(trace_path);
  } catch (const secform::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  } catch (const secform::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  } catch (const secform::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
