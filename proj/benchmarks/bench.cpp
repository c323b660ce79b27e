#include <benchmark/benchmark.h>

#include <cmath>

#include "secform/formation.hpp"
#include "secform/linalg.hpp"
#include "secform/lwe.hpp"
#include "secform/pipeline.hpp"
#include "secform/quantizer.hpp"
#include "secform/sim.hpp"

using namespace secform;

namespace {

lwe::LweParams production_params() {
  return lwe::LweParams::create(pow10_u128(11), pow10_u128(22), 4, 30);
}

}  // namespace

static void BM_Encrypt(benchmark::State& state) {
  const auto params = production_params();
  Mt19937Source rng(1);
  const auto key = lwe::keygen(params, rng);
  lwe::Plaintext m(static_cast<std::size_t>(state.range(0)));
  for (auto& v : m) v = rng.signed_uniform(static_cast<std::int64_t>(params.plain_modulus));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lwe::encrypt(m, key, params, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Encrypt)->Arg(1)->Arg(5)->Arg(32);

static void BM_Decrypt(benchmark::State& state) {
  const auto params = production_params();
  Mt19937Source rng(2);
  const auto key = lwe::keygen(params, rng);
  const lwe::Plaintext m(5, 12345);
  const auto c = lwe::encrypt(m, key, params, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lwe::decrypt(c, key, params));
  }
}
BENCHMARK(BM_Decrypt);

static void BM_Encrypt2(benchmark::State& state) {
  const auto params = production_params();
  Mt19937Source rng(3);
  const auto key = lwe::keygen(params, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lwe::encrypt2(1234, key, params, rng));
  }
}
BENCHMARK(BM_Encrypt2);

static void BM_CipherProduct(benchmark::State& state) {
  const auto params = production_params();
  Mt19937Source rng(4);
  const auto key = lwe::keygen(params, rng);
  const auto left = lwe::encrypt2(1234, key, params, rng);
  const auto right = lwe::encrypt(lwe::Plaintext{-5678}, key, params, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lwe::mult(left, right, params));
  }
}
BENCHMARK(BM_CipherProduct);

static void BM_Quantize(benchmark::State& state) {
  const mulq::MulqConfig cfg{static_cast<int>(state.range(0))};
  Mt19937Source rng(5);
  for (auto _ : state) {
    const double x = rng.uniform_real(-1e4, 1e4);
    benchmark::DoNotOptimize(mulq::to_plaintext(x, cfg));
  }
}
BENCHMARK(BM_Quantize)->Arg(1)->Arg(4)->Arg(15);

static void BM_SectorCheck(benchmark::State& state) {
  const mulq::MulqConfig cfg{4};
  Mt19937Source rng(6);
  for (auto _ : state) {
    const double x = rng.uniform_real(-1e4, 1e4);
    benchmark::DoNotOptimize(mulq::sector_check_a1(x, cfg));
  }
}
BENCHMARK(BM_SectorCheck);

static void BM_EdgeRoundTrip(benchmark::State& state) {
  // sensor encrypt -> edge compute -> both endpoint decrypts, for one edge
  pipeline::KeySession session{production_params(), {}};
  Mt19937Source rng(7);
  session.key = lwe::keygen(session.params, rng);
  const auto edge = pipeline::edge_context(session);
  const auto g = graph::FormationGraph::create(2, {{0, 1}}, {1.0});
  const mulq::MulqConfig cfg{4};
  for (auto _ : state) {
    const auto packet =
        pipeline::sense_encrypt(0, {1.2, -0.4}, 0.53, cfg, cfg, session, rng);
    const auto result = pipeline::edge_compute(packet, edge);
    const std::vector<pipeline::EdgeResult> results{result};
    benchmark::DoNotOptimize(pipeline::agent_decrypt_rescale(results, g, 0, session));
    benchmark::DoNotOptimize(pipeline::agent_decrypt_rescale(results, g, 1, session));
  }
}
BENCHMARK(BM_EdgeRoundTrip);

static void BM_SecureStep(benchmark::State& state) {
  sim::SimConfig config = sim::demo_square();
  config.csv_path.clear();
  config.manifest_path.clear();
  sim::Simulator simulator(config);
  graph::FormationState s{{0.1, -0.05, 1.02, 0.11, 0.9, 1.04, -0.02, 0.97}};
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulator.step(s, t));
    t += config.dt;
  }
}
BENCHMARK(BM_SecureStep);

static void BM_JacobiEigen(benchmark::State& state) {
  const auto g = graph::FormationGraph::create(
      4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {0, 3}}, {1.0, 1.0, std::sqrt(2.0), 1.0, 1.0});
  const graph::FormationState square{{0, 0, 1, 0, 1, 1, 0, 1}};
  const linalg::Mat gram = linalg::gram(graph::rigidity_matrix(square, g));
  for (auto _ : state) {
    benchmark::DoNotOptimize(linalg::jacobi_eigenvalues(gram));
  }
}
BENCHMARK(BM_JacobiEigen);

BENCHMARK_MAIN();
