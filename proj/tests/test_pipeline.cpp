#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "secform/errors.hpp"
#include "secform/pipeline.hpp"

using namespace secform;
using namespace secform::pipeline;
using secform::graph::FormationGraph;
using secform::graph::FormationState;

namespace {

KeySession make_session(std::uint64_t seed = 1) {
  KeySession s;
  s.params = lwe::LweParams::create(pow10_u128(11), pow10_u128(22), 4, 30);
  Mt19937Source rng(seed);
  s.key = lwe::keygen(s.params, rng);
  return s;
}

FormationGraph square_graph() {
  return FormationGraph::create(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {0, 3}},
                                {1.0, 1.0, std::sqrt(2.0), 1.0, 1.0});
}

FormationState perturbed_square(std::uint64_t seed, double magnitude) {
  Mt19937Source rng(seed);
  FormationState s{{0, 0, 1, 0, 1, 1, 0, 1}};
  for (double& x : s.positions) x += rng.uniform_real(-magnitude, magnitude);
  return s;
}

// full sensor -> edge -> agent pass over a state
std::vector<double> pipeline_command(const FormationState& state, const FormationGraph& g,
                                     const mulq::MulqConfig& cfg_z,
                                     const mulq::MulqConfig& cfg_e,
                                     const KeySession& session, RandomSource& rng) {
  const EdgeContext edge = edge_context(session);
  const std::vector<double> z = graph::relative_positions(state, g);
  const std::vector<double> e = graph::distance_errors(state, g);
  std::vector<EdgeResult> results;
  for (int k = 0; k < g.edge_count(); ++k) {
    const SensorPacket packet = sense_encrypt(
        k, {z[2 * k], z[2 * k + 1]}, e[static_cast<std::size_t>(k)], cfg_z, cfg_e,
        session, rng);
    results.push_back(edge_compute(packet, edge));
  }
  std::vector<double> u(2 * static_cast<std::size_t>(g.agent_count), 0.0);
  for (int agent = 0; agent < g.agent_count; ++agent) {
    const std::array<double, 2> ua = agent_decrypt_rescale(results, g, agent, session);
    u[2 * agent] = ua[0];
    u[2 * agent + 1] = ua[1];
  }
  return u;
}

}  // namespace

// The compute party's context type must not expose any decryption capability.
template <typename T>
concept HoldsKeyMaterial = requires(T t) { t.key; };
template <typename T>
concept OffersDecryption = requires(T t, lwe::CipherVec c) { decrypt(c, t); };
static_assert(HoldsKeyMaterial<KeySession>);
static_assert(!HoldsKeyMaterial<EdgeContext>);
static_assert(!OffersDecryption<EdgeContext>);

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("budget preconditions") {
  const KeySession session = make_session();
  CHECK_NOTHROW(require_budget(mulq::MulqConfig{4}, mulq::MulqConfig{4}, session.params));
  CHECK_NOTHROW(require_budget(mulq::MulqConfig{1}, mulq::MulqConfig{4}, session.params));

  // digit product 10^12 does not fit the plaintext space a = 10^11
  CHECK_THROWS_AS(require_budget(mulq::MulqConfig{6}, mulq::MulqConfig{6}, session.params),
                  BudgetExceeded);

  // the toy modulus fails the injected-error budget outright
  const lwe::LweParams toy = lwe::LweParams::create(10, 1000, 2, 2);
  CHECK_THROWS_AS(require_budget(mulq::MulqConfig{1}, mulq::MulqConfig{1}, toy),
                  BudgetExceeded);

  Mt19937Source rng(5);
  CHECK_THROWS_AS(sense_encrypt(0, {1.0, 0.0}, 0.0, mulq::MulqConfig{6},
                                mulq::MulqConfig{6}, session, rng),
                  BudgetExceeded);
}

TEST_CASE("sensor packets open to the quantized plaintexts") {
  const KeySession session = make_session();
  Mt19937Source rng(11);
  const mulq::MulqConfig cfg_z{4}, cfg_e{4};

  SUBCASE("zero error at the target distance") {
    const SensorPacket p = sense_encrypt(3, {1.0, 0.0}, 0.0, cfg_z, cfg_e, session, rng);
    CHECK(p.edge_id == 3);
    CHECK(lwe::decrypt(p.e, session.key, session.params) == lwe::Plaintext{0});
    // z = 1.0 quantizes to digit integer 1000 with exponent 3
    CHECK(lwe::decrypt(p.sz1, session.key, session.params) == lwe::Plaintext{3});
    const lwe::CipherVec one = lwe::encrypt(lwe::Plaintext{1}, session.key, session.params, rng);
    CHECK(lwe::decrypt(lwe::mult(p.z1, one, session.params), session.key, session.params) ==
          lwe::Plaintext{1000});
  }

  SUBCASE("random states reproduce to_plaintext exactly") {
    for (int trial = 0; trial < 300; ++trial) {
      const double zx = rng.uniform_real(-3, 3);
      const double zy = rng.uniform_real(-3, 3);
      const double ev = rng.uniform_real(-2, 2);
      const SensorPacket p = sense_encrypt(0, {zx, zy}, ev, cfg_z, cfg_e, session, rng);
      const mulq::QuantizedValue qz1 = mulq::to_plaintext(zx, cfg_z);
      const mulq::QuantizedValue qz2 = mulq::to_plaintext(zy, cfg_z);
      const mulq::QuantizedValue qe = mulq::to_plaintext(ev, cfg_e);
      REQUIRE(lwe::decrypt(p.e, session.key, session.params)[0] == qe.digits);
      REQUIRE(lwe::decrypt(p.sz1, session.key, session.params)[0] == qz1.scale_exp);
      REQUIRE(lwe::decrypt(p.sz2, session.key, session.params)[0] == qz2.scale_exp);
      REQUIRE(lwe::decrypt(p.se, session.key, session.params)[0] == qe.scale_exp);
    }
  }
}

TEST_CASE("edge computation") {
  const KeySession session = make_session();
  const EdgeContext edge = edge_context(session);
  Mt19937Source rng(13);
  const mulq::MulqConfig cfg{4};

  SUBCASE("worked digit example") {
    // z component 0.123 -> digits 1230, exponent 4; error 5.0 -> 5000, exponent 3
    const SensorPacket p = sense_encrypt(0, {0.123, 0.0}, 5.0, cfg, cfg, session, rng);
    const EdgeResult r = edge_compute(p, edge);
    CHECK(lwe::decrypt(r.u1, session.key, session.params) == lwe::Plaintext{6150000});
    CHECK(lwe::decrypt(r.ssum1, session.key, session.params) == lwe::Plaintext{7});
  }

  SUBCASE("zero error annihilates the product") {
    const SensorPacket p = sense_encrypt(0, {0.5, -0.25}, 0.0, cfg, cfg, session, rng);
    const EdgeResult r = edge_compute(p, edge);
    CHECK(lwe::decrypt(r.u1, session.key, session.params) == lwe::Plaintext{0});
    CHECK(lwe::decrypt(r.u2, session.key, session.params) == lwe::Plaintext{0});
  }
}

TEST_CASE("agent rescaling") {
  const KeySession session = make_session();
  const FormationGraph g = square_graph();
  Mt19937Source rng(17);
  const mulq::MulqConfig cfg{4};

  SUBCASE("all incident errors zero gives a zero command") {
    const EdgeContext edge = edge_context(session);
    std::vector<EdgeResult> results;
    const FormationState square{{0, 0, 1, 0, 1, 1, 0, 1}};
    const std::vector<double> z = graph::relative_positions(square, g);
    for (int k = 0; k < g.edge_count(); ++k) {
      const SensorPacket p =
          sense_encrypt(k, {z[2 * k], z[2 * k + 1]}, 0.0, cfg, cfg, session, rng);
      results.push_back(edge_compute(p, edge));
    }
    for (int agent = 0; agent < 4; ++agent) {
      const std::array<double, 2> u = agent_decrypt_rescale(results, g, agent, session);
      CHECK(u[0] == 0.0);
      CHECK(u[1] == 0.0);
    }
  }

  SUBCASE("a missing incident edge is an error") {
    const EdgeContext edge = edge_context(session);
    const FormationState s = perturbed_square(3, 0.2);
    const std::vector<double> z = graph::relative_positions(s, g);
    const std::vector<double> e = graph::distance_errors(s, g);
    std::vector<EdgeResult> results;
    for (int k = 0; k < g.edge_count() - 1; ++k) {  // drop the last edge
      const SensorPacket p = sense_encrypt(
          k, {z[2 * k], z[2 * k + 1]}, e[static_cast<std::size_t>(k)], cfg, cfg, session, rng);
      results.push_back(edge_compute(p, edge));
    }
    // agent 3 is an endpoint of the dropped edge (3,4)
    CHECK_THROWS_AS(agent_decrypt_rescale(results, g, 3, session), MissingEdgeResult);
  }
}

TEST_CASE("pipeline equals the quantized law bit for bit") {
  const KeySession session = make_session();
  const mulq::MulqConfig cfg_z{4}, cfg_e{4};
  Mt19937Source rng(23);

  SUBCASE("single edge") {
    const FormationGraph pair = FormationGraph::create(2, {{0, 1}}, {1.0});
    const FormationState s{{0.1, -0.2, 1.4, 0.9}};
    const std::vector<double> expected = graph::control_law_quantized(s, pair, cfg_z, cfg_e);
    const std::vector<double> got = pipeline_command(s, pair, cfg_z, cfg_e, session, rng);
    for (std::size_t i = 0; i < expected.size(); ++i) REQUIRE(got[i] == expected[i]);
  }

  SUBCASE("square scenario, random in-basin states") {
    const FormationGraph g = square_graph();
    Mt19937Source state_rng(29);
    int tested = 0;
    while (tested < 30) {
      const FormationState s = perturbed_square(state_rng.next_u64(), 0.3);
      const std::vector<double> e = graph::distance_errors(s, g);
      double norm2 = 0.0;
      for (double v : e) norm2 += v * v;
      if (std::sqrt(norm2) >= 2.7) continue;
      ++tested;
      const std::vector<double> expected = graph::control_law_quantized(s, g, cfg_z, cfg_e);
      const std::vector<double> got = pipeline_command(s, g, cfg_z, cfg_e, session, rng);
      for (std::size_t i = 0; i < expected.size(); ++i) REQUIRE(got[i] == expected[i]);
    }
  }

  SUBCASE("far states exercise negative exponent sums") {
    const FormationGraph g = square_graph();
    // scaled-up square: z ~ 300, e ~ 1e5, so error exponents go negative
    FormationState s{{0, 0, 300, 0, 300, 300, 0, 300}};
    const std::vector<double> e = graph::distance_errors(s, g);
    CHECK(e[0] > 1e4);
    const mulq::QuantizedValue qe = mulq::to_plaintext(e[0], cfg_e);
    CHECK(qe.scale_exp < 0);
    const std::vector<double> expected = graph::control_law_quantized(s, g, cfg_z, cfg_e);
    const std::vector<double> got = pipeline_command(s, g, cfg_z, cfg_e, session, rng);
    for (std::size_t i = 0; i < expected.size(); ++i) REQUIRE(got[i] == expected[i]);
  }

  SUBCASE("mixed significant-figure counts") {
    const FormationGraph g = square_graph();
    const mulq::MulqConfig z1{1}, e4{4};
    const FormationState s = perturbed_square(31, 0.25);
    const std::vector<double> expected = graph::control_law_quantized(s, g, z1, e4);
    const std::vector<double> got = pipeline_command(s, g, z1, e4, session, rng);
    for (std::size_t i = 0; i < expected.size(); ++i) REQUIRE(got[i] == expected[i]);
  }
}

TEST_CASE("trace round trip and offline verification") {
  const KeySession session = make_session(41);
  const FormationGraph g = square_graph();
  const mulq::MulqConfig cfg{4};
  Mt19937Source rng(43);

  Trace trace;
  trace.params = session.params;
  trace.key = session.key;
  trace.graph = g;
  trace.sigma_z = 4;
  trace.sigma_e = 4;

  FormationState state = perturbed_square(47, 0.2);
  const EdgeContext edge = edge_context(session);
  for (int step = 0; step < 3; ++step) {
    TraceStep ts;
    ts.t = 0.01 * step;
    ts.positions = state.positions;
    const std::vector<double> z = graph::relative_positions(state, g);
    const std::vector<double> e = graph::distance_errors(state, g);
    for (int k = 0; k < g.edge_count(); ++k) {
      ts.packets.push_back(sense_encrypt(k, {z[2 * k], z[2 * k + 1]},
                                         e[static_cast<std::size_t>(k)], cfg, cfg,
                                         session, rng));
      ts.results.push_back(edge_compute(ts.packets.back(), edge));
    }
    const std::vector<double> u = graph::control_law_quantized(state, g, cfg, cfg);
    for (std::size_t i = 0; i < state.positions.size(); ++i) {
      state.positions[i] += 0.01 * u[i];
    }
    trace.steps.push_back(std::move(ts));
  }

  std::stringstream ss;
  write_trace(ss, trace);
  const Trace loaded = read_trace(ss);
  CHECK(loaded.steps.size() == 3);
  CHECK(loaded.graph.agent_count == 4);
  CHECK(loaded.key.s == trace.key.s);
  CHECK(loaded.steps[1].positions == trace.steps[1].positions);

  SUBCASE("clean traces verify") {
    const VerifyReport report = verify_trace(loaded);
    CHECK(report.ok());
    CHECK(report.steps_checked == 3);
  }

  SUBCASE("a flipped ciphertext digit is detected") {
    Trace tampered = loaded;
    lwe::CipherVec& target = tampered.steps[1].results[2].u1;
    target.data[0] = (target.data[0] + 1) % target.modulus;
    const VerifyReport report = verify_trace(tampered);
    CHECK_FALSE(report.ok());
  }

  SUBCASE("a tampered packet is detected") {
    Trace tampered = loaded;
    lwe::CipherMat& target = tampered.steps[0].packets[1].z1;
    target.data[5] = (target.data[5] + 1) % target.modulus;
    const VerifyReport report = verify_trace(tampered);
    CHECK_FALSE(report.ok());
  }

  SUBCASE("a tampered recorded state is detected") {
    Trace tampered = loaded;
    tampered.steps[2].positions[3] += 1e-3;
    const VerifyReport report = verify_trace(tampered);
    CHECK_FALSE(report.ok());
  }
}

TEST_SUITE_END();
