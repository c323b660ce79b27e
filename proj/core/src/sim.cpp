#include "secform/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "secform/errors.hpp"

namespace secform::sim {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Exact: return "exact";
    case Mode::Quantized: return "quantized";
    case Mode::Secure: return "secure";
  }
  return "secure";
}

Mode mode_from_string(const std::string& s) {
  if (s == "exact") return Mode::Exact;
  if (s == "quantized" || s == "quantized-plaintext") return Mode::Quantized;
  if (s == "secure") return Mode::Secure;
  throw ConfigError("unknown mode '" + s + "' (expected exact, quantized, or secure)");
}

namespace {

// seed streams for the independent random purposes
constexpr std::uint64_t kKeyStream = 0x6b65795f73656564ULL;
constexpr std::uint64_t kInitStream = 0x696e69745f736565ULL;
constexpr std::uint64_t kEncStream = 0x656e635f73656564ULL;

void validate_config(const SimConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.t_end >= c.dt)) throw ConfigError("t_end must be at least dt");
  if (!(c.basin_delta > 0.0)) throw ConfigError("basin_delta must be positive");
  mulq::validate(mulq::MulqConfig{c.sigma_z});
  mulq::validate(mulq::MulqConfig{c.sigma_e});
  if (!c.initial_positions.empty() &&
      static_cast<int>(c.initial_positions.size()) != 2 * c.graph.agent_count) {
    throw ConfigError("initial position list does not match the agent count");
  }
  if (!c.target_positions.empty() &&
      static_cast<int>(c.target_positions.size()) != 2 * c.graph.agent_count) {
    throw ConfigError("target position list does not match the agent count");
  }
  if (c.initial_positions.empty() && c.target_positions.empty()) {
    throw ConfigError("either explicit initial positions or a target shape is required");
  }
  if (c.mode == Mode::Secure) {
    pipeline::require_budget(mulq::MulqConfig{c.sigma_z}, mulq::MulqConfig{c.sigma_e},
                             c.params);
  }
}

std::vector<double> sample_initial_positions(const SimConfig& c) {
  if (!c.initial_positions.empty()) return c.initial_positions;
  Mt19937Source rng(c.seed ^ kInitStream);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<double> p = c.target_positions;
    for (double& x : p) x += rng.uniform_real(-c.perturbation, c.perturbation);
    graph::FormationState state{p};
    const std::vector<double> e = graph::distance_errors(state, c.graph);
    double norm2 = 0.0;
    for (double v : e) norm2 += v * v;
    if (std::sqrt(norm2) < c.basin_delta) return p;
  }
  throw ConfigError("could not sample an initial condition inside the basin");
}

double error_norm(const std::vector<double>& e) {
  double s = 0.0;
  for (double v : e) s += v * v;
  return std::sqrt(s);
}

}  // namespace

Simulator::Simulator(const SimConfig& config)
    : config_(config),
      session_{config.params, {}},
      edge_{config.params},
      enc_rng_(config.seed ^ kEncStream) {
  validate_config(config_);
  Mt19937Source key_rng(config_.seed ^ kKeyStream);
  session_.key = lwe::keygen(config_.params, key_rng);
  if (config_.mode == Mode::Secure && !config_.trace_path.empty()) {
    trace_enabled_ = true;
    trace_.params = config_.params;
    trace_.key = session_.key;
    trace_.graph = config_.graph;
    trace_.sigma_z = config_.sigma_z;
    trace_.sigma_e = config_.sigma_e;
  }
}

TrajectoryRecord Simulator::step(graph::FormationState& state, double t) {
  const mulq::MulqConfig cfg_z{config_.sigma_z};
  const mulq::MulqConfig cfg_e{config_.sigma_e};

  TrajectoryRecord rec;
  rec.t = t;
  rec.positions = state.positions;
  rec.errors = graph::distance_errors(state, config_.graph);
  rec.lyapunov = stability::lyapunov(rec.errors);

  switch (config_.mode) {
    case Mode::Exact:
      rec.command = graph::control_law_exact(state, config_.graph);
      break;
    case Mode::Quantized:
      rec.command = graph::control_law_quantized(state, config_.graph, cfg_z, cfg_e);
      break;
    case Mode::Secure: {
      const std::vector<double> z = graph::relative_positions(state, config_.graph);
      std::vector<pipeline::SensorPacket> packets;
      packets.reserve(config_.graph.edge_count());
      for (int k = 0; k < config_.graph.edge_count(); ++k) {
        packets.push_back(pipeline::sense_encrypt(
            k, {z[2 * k], z[2 * k + 1]}, rec.errors[static_cast<std::size_t>(k)],
            cfg_z, cfg_e, session_, enc_rng_));
      }
      std::vector<pipeline::EdgeResult> results;
      results.reserve(packets.size());
      for (const pipeline::SensorPacket& p : packets) {
        results.push_back(pipeline::edge_compute(p, edge_));
      }
      rec.command.assign(2 * static_cast<std::size_t>(config_.graph.agent_count), 0.0);
      for (int agent = 0; agent < config_.graph.agent_count; ++agent) {
        const std::array<double, 2> u =
            pipeline::agent_decrypt_rescale(results, config_.graph, agent, session_);
        rec.command[2 * agent] = u[0];
        rec.command[2 * agent + 1] = u[1];
      }
      const std::vector<double> reference =
          graph::control_law_quantized(state, config_.graph, cfg_z, cfg_e);
      rec.pipeline_equiv = rec.command == reference;
      if (trace_enabled_) {
        pipeline::TraceStep ts;
        ts.t = t;
        ts.positions = state.positions;
        ts.packets = std::move(packets);
        ts.results = std::move(results);
        trace_.steps.push_back(std::move(ts));
      }
      break;
    }
  }

  for (std::size_t i = 0; i < state.positions.size(); ++i) {
    state.positions[i] += config_.dt * rec.command[i];
    if (!std::isfinite(state.positions[i])) {
      throw NonFiniteState("position diverged at t = " + std::to_string(t));
    }
  }
  return rec;
}

RunSummary run(const SimConfig& config, std::vector<TrajectoryRecord>* records_out) {
  Simulator simulator(config);
  const SimConfig& c = simulator.config();

  RunSummary summary;

  // stability verdict for the configured error-signal quantizer
  if (!c.target_positions.empty()) {
    graph::FormationState target{c.target_positions};
    summary.report = stability::analyze(c.graph, target, c.basin_delta, c.sigma_e);
    summary.report_available = true;
    summary.decay_warning = !summary.report.decay_certified();
  } else {
    summary.decay_warning = true;
  }

  graph::FormationState state{sample_initial_positions(c)};
  const std::vector<double> start = state.positions;

  const int steps = static_cast<int>(std::llround(c.t_end / c.dt));
  std::vector<TrajectoryRecord> records;
  records.reserve(static_cast<std::size_t>(steps) + 1);

  bool in_basin = false;
  double prev_v = 0.0;
  for (int k = 0; k <= steps; ++k) {
    TrajectoryRecord rec = simulator.step(state, k * c.dt);
    const double norm = error_norm(rec.errors);
    if (!in_basin && norm < c.basin_delta) {
      in_basin = true;
      summary.entered_basin = true;
      prev_v = rec.lyapunov;
    } else if (in_basin) {
      if (rec.lyapunov > prev_v && prev_v > kLyapunovFloor) {
        summary.lyapunov_monotone = false;
      }
      prev_v = rec.lyapunov;
    }
    summary.pipeline_equiv_all = summary.pipeline_equiv_all && rec.pipeline_equiv;
    records.push_back(std::move(rec));
  }

  summary.steps = steps;
  summary.final_error_norm = error_norm(records.back().errors);
  summary.converged = summary.final_error_norm < kConvergenceNorm;

  // centroid drift relative to the start
  double drift = 0.0;
  const std::vector<double>& last = records.back().positions;
  for (int axis = 0; axis < 2; ++axis) {
    double c0 = 0.0, c1 = 0.0;
    for (int i = 0; i < c.graph.agent_count; ++i) {
      c0 += start[2 * i + axis];
      c1 += last[2 * i + axis];
    }
    drift = std::max(drift, std::fabs(c1 - c0) / c.graph.agent_count);
  }
  summary.centroid_drift = drift;

  // semilog slope over the clean part of the decay (skip the transient and
  // the double-precision floor)
  {
    std::vector<double> ts, logs;
    const double t_min = std::min(1.0, 0.25 * c.t_end);
    for (const TrajectoryRecord& r : records) {
      const double norm = error_norm(r.errors);
      if (r.t >= t_min && norm > 1e-12) {
        ts.push_back(r.t);
        logs.push_back(std::log(norm));
      }
    }
    if (ts.size() >= 8) {
      double mt = 0.0, ml = 0.0;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        mt += ts[i];
        ml += logs[i];
      }
      mt /= ts.size();
      ml /= ts.size();
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        num += (ts[i] - mt) * (logs[i] - ml);
        den += (ts[i] - mt) * (ts[i] - mt);
      }
      if (den > 0.0) {
        summary.fitted_rate = num / den;
        summary.rate_available = true;
      }
    }
  }

  if (!c.csv_path.empty()) {
    std::ofstream os(c.csv_path);
    if (!os) throw ConfigError("cannot open CSV output '" + c.csv_path + "'");
    write_csv(os, c, records);
  }
  if (!c.manifest_path.empty()) {
    std::ofstream os(c.manifest_path);
    if (!os) throw ConfigError("cannot open manifest output '" + c.manifest_path + "'");
    os << manifest_text(c, summary);
  }
  if (pipeline::Trace* trace = simulator.trace()) {
    std::ofstream os(c.trace_path);
    if (!os) throw ConfigError("cannot open trace output '" + c.trace_path + "'");
    pipeline::write_trace(os, *trace);
  }

  if (records_out != nullptr) *records_out = std::move(records);
  return summary;
}

SimConfig demo_square() {
  SimConfig c;
  c.scenario = "demo-square";
  c.graph = graph::FormationGraph::create(
      4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {0, 3}},
      {1.0, 1.0, std::sqrt(2.0), 1.0, 1.0});
  c.target_positions = {0, 0, 1, 0, 1, 1, 0, 1};
  c.perturbation = 0.3;
  c.basin_delta = 2.7;
  c.dt = 0.01;
  c.t_end = 30.0;
  c.sigma_z = 4;
  c.sigma_e = 4;
  c.params = lwe::LweParams::create(pow10_u128(11), pow10_u128(22), 4, 30);
  c.mode = Mode::Secure;
  c.seed = 1;
  c.reference = ScenarioReference{0.058, 4.11, 12.04};
  return c;
}

// ---- configuration file ----

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + s + "'");
  }
}

u128 parse_power_value(const std::string& s, const std::string& key) {
  // accepts "10^22" or a plain decimal integer
  const auto caret = s.find('^');
  try {
    if (caret != std::string::npos) {
      const u128 base = parse_u128(s.substr(0, caret));
      const int exp = std::stoi(s.substr(caret + 1));
      if (base != 10) throw ParseError("only base 10 is supported");
      return pow10_u128(exp);
    }
    return parse_u128(s);
  } catch (const std::exception&) {
    throw ConfigError("bad modulus value for " + key + ": '" + s + "'");
  }
}

}  // namespace

SimConfig load_config(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string section, line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto kb = key.find_last_not_of(" \t");
    key = key.substr(0, kb + 1);
    const auto vb = value.find_first_not_of(" \t");
    value = vb == std::string::npos ? std::string() : value.substr(vb);
    kv[section + "." + key] = value;
  }

  const auto take = [&](const std::string& name) -> std::optional<std::string> {
    const auto it = kv.find(name);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  const auto require = [&](const std::string& name) {
    auto v = take(name);
    if (!v) throw ConfigError("missing required key '" + name + "'");
    return *v;
  };

  SimConfig c;
  c.scenario = take("scenario.name").value_or("custom");

  const int agents = static_cast<int>(parse_double(require("graph.agents"), "graph.agents"));
  std::vector<std::pair<int, int>> edges;
  for (const std::string& tok : split_list(require("graph.edges"))) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos) {
      throw ConfigError("bad edge '" + tok + "', expected tail-head (1-based)");
    }
    const int tail = std::stoi(tok.substr(0, dash));
    const int head = std::stoi(tok.substr(dash + 1));
    edges.emplace_back(tail - 1, head - 1);
  }
  std::vector<double> dists;
  for (const std::string& tok : split_list(require("graph.distances"))) {
    dists.push_back(parse_double(tok, "graph.distances"));
  }
  c.graph = graph::FormationGraph::create(agents, std::move(edges), std::move(dists));

  if (auto v = take("graph.target")) {
    for (const std::string& tok : split_list(*v)) {
      c.target_positions.push_back(parse_double(tok, "graph.target"));
    }
  }

  const u128 a = parse_power_value(require("encryption.a"), "encryption.a");
  const u128 q = parse_power_value(require("encryption.q"), "encryption.q");
  const auto r = static_cast<std::int64_t>(parse_double(require("encryption.r"), "encryption.r"));
  const int n = static_cast<int>(parse_double(require("encryption.N"), "encryption.N"));
  c.params = lwe::LweParams::create(a, q, r, n);

  if (auto v = take("simulation.dt")) c.dt = parse_double(*v, "simulation.dt");
  if (auto v = take("simulation.t_end")) c.t_end = parse_double(*v, "simulation.t_end");
  if (auto v = take("simulation.sigma_z")) c.sigma_z = static_cast<int>(parse_double(*v, "sigma_z"));
  if (auto v = take("simulation.sigma_e")) c.sigma_e = static_cast<int>(parse_double(*v, "sigma_e"));
  if (auto v = take("simulation.mode")) c.mode = mode_from_string(*v);
  if (auto v = take("simulation.seed")) c.seed = std::stoull(*v);
  if (auto v = take("simulation.perturbation")) c.perturbation = parse_double(*v, "perturbation");
  if (auto v = take("simulation.basin_delta")) c.basin_delta = parse_double(*v, "basin_delta");
  if (auto v = take("simulation.initial")) {
    if (*v != "perturb" && *v != "explicit") {
      throw ConfigError("simulation.initial must be 'perturb' or 'explicit'");
    }
    if (*v == "explicit") {
      for (const std::string& tok : split_list(require("simulation.positions"))) {
        c.initial_positions.push_back(parse_double(tok, "simulation.positions"));
      }
    }
  }

  if (auto v = take("output.csv")) c.csv_path = *v;
  if (auto v = take("output.manifest")) c.manifest_path = *v;
  if (auto v = take("output.trace")) c.trace_path = *v;

  if (!kv.empty()) {
    throw ConfigError("unknown configuration key '" + kv.begin()->first + "'");
  }
  return c;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open configuration file '" + path + "'");
  return load_config(is);
}

namespace {

std::string canonical_text(const SimConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "scenario=" << c.scenario << ";agents=" << c.graph.agent_count << ";edges=";
  for (const auto& [tail, head] : c.graph.edges) os << tail << '-' << head << ',';
  os << ";d=";
  for (double d : c.graph.desired_distances) os << d << ',';
  os << ";target=";
  for (double p : c.target_positions) os << p << ',';
  os << ";initial=";
  for (double p : c.initial_positions) os << p << ',';
  os << ";perturbation=" << c.perturbation << ";delta=" << c.basin_delta
     << ";dt=" << c.dt << ";t_end=" << c.t_end << ";sigma_z=" << c.sigma_z
     << ";sigma_e=" << c.sigma_e << ";a=" << secform::to_string(c.params.plain_modulus)
     << ";q=" << secform::to_string(c.params.cipher_modulus) << ";r=" << c.params.error_range
     << ";N=" << c.params.key_length << ";mode=" << to_string(c.mode)
     << ";seed=" << c.seed;
  return os.str();
}

}  // namespace

std::uint64_t config_hash(const SimConfig& c) {
  // FNV-1a over the canonical text
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : canonical_text(c)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_text(const SimConfig& c, const RunSummary& s) {
  std::ostringstream os;
  os.precision(15);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_hash(c)));

  os << "scenario = " << c.scenario << '\n'
     << "config_hash = " << hash << '\n'
     << "mode = " << to_string(c.mode) << '\n'
     << "seed = " << c.seed << '\n'
     << "agents = " << c.graph.agent_count << '\n'
     << "edges = " << c.graph.edge_count() << '\n'
     << "a = " << secform::to_string(c.params.plain_modulus) << '\n'
     << "q = " << secform::to_string(c.params.cipher_modulus) << '\n'
     << "r = " << c.params.error_range << '\n'
     << "N = " << c.params.key_length << '\n'
     << "dt = " << c.dt << '\n'
     << "t_end = " << c.t_end << '\n'
     << "sigma_z = " << c.sigma_z << '\n'
     << "sigma_e = " << c.sigma_e << '\n';

  if (s.report_available) {
    os << s.report.to_text();
  } else {
    os << "stability_report = unavailable (no target shape configured)\n";
  }
  if (c.reference) {
    os << "lambda_min_reference = " << c.reference->lambda_min << '\n'
       << "lambda_max_reference = " << c.reference->lambda_max << '\n'
       << "c_reference = " << c.reference->c << '\n';
    const auto flag = [&](const char* name, double computed, double reference) {
      if (std::fabs(computed - reference) > 0.01 * std::max(1e-12, std::fabs(reference))) {
        os << name << "_note = computed value " << computed
           << " differs from the reference value " << reference
           << " for this scenario; the computed value is used\n";
      }
    };
    flag("lambda_min", s.report.lambda_min, c.reference->lambda_min);
    flag("lambda_max", s.report.lambda_max, c.reference->lambda_max);
    flag("c", s.report.c, c.reference->c);
  }
  if (s.decay_warning) {
    os << "warning = decay margin k <= 0 at sigma_e = " << c.sigma_e
       << "; convergence is not certified for this configuration\n";
  }

  os << "steps = " << s.steps << '\n'
     << "final_error_norm = " << s.final_error_norm << '\n'
     << "converged = " << (s.converged ? "true" : "false") << '\n'
     << "entered_basin = " << (s.entered_basin ? "true" : "false") << '\n'
     << "lyapunov_monotone = " << (s.lyapunov_monotone ? "true" : "false") << '\n';
  if (s.rate_available) {
    os << "fitted_rate = " << s.fitted_rate << '\n';
  } else {
    os << "fitted_rate = n/a\n";
  }
  os << "centroid_drift = " << s.centroid_drift << '\n'
     << "pipeline_equiv_all_steps = " << (s.pipeline_equiv_all ? "true" : "false") << '\n';
  if (!c.csv_path.empty()) os << "csv = " << c.csv_path << '\n';
  if (!c.trace_path.empty()) os << "trace = " << c.trace_path << '\n';
  return os.str();
}

void write_csv(std::ostream& os, const SimConfig& c,
               const std::vector<TrajectoryRecord>& records) {
  os << 't';
  for (int k = 0; k < c.graph.edge_count(); ++k) os << ",e_" << k + 1;
  for (int i = 0; i < c.graph.agent_count; ++i) {
    os << ",p_" << i + 1 << "x,p_" << i + 1 << 'y';
  }
  os << ",V,equiv\n";

  char buf[40];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    os << buf;
  };
  for (const TrajectoryRecord& r : records) {
    put(r.t);
    for (double e : r.errors) {
      os << ',';
      put(e);
    }
    for (double p : r.positions) {
      os << ',';
      put(p);
    }
    os << ',';
    put(r.lyapunov);
    os << ',' << (r.pipeline_equiv ? 1 : 0) << '\n';
  }
}

}  // namespace secform::sim
