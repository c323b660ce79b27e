#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "secform/errors.hpp"
#include "secform/sim.hpp"
#include "secform/stability.hpp"

using namespace secform;
using namespace secform::stability;
using secform::graph::FormationGraph;
using secform::graph::FormationState;

namespace {

FormationGraph square_graph() {
  return FormationGraph::create(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {0, 3}},
                                {1.0, 1.0, std::sqrt(2.0), 1.0, 1.0});
}

FormationState unit_square() { return FormationState{{0, 0, 1, 0, 1, 1, 0, 1}}; }

}  // namespace

TEST_SUITE_BEGIN("stability");

TEST_CASE("lyapunov value") {
  CHECK(lyapunov(std::vector<double>{}) == 0.0);
  CHECK(lyapunov(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(lyapunov(std::vector<double>{2, 0, 0, 0, 0}) == 1.0);
  CHECK(lyapunov(std::vector<double>{1, 1}) == 0.5);
}

TEST_CASE("basin bound c") {
  const FormationGraph g = square_graph();
  const double c = compute_c(2.7, g.desired_distances);
  CHECK(c == doctest::Approx(12.0373835392).epsilon(1e-10));
  CHECK(c == 6.0 + std::sqrt(5.0) * 2.7);

  CHECK(compute_c(1e-12, g.desired_distances) == doctest::Approx(6.0).epsilon(1e-10));
  const std::vector<double> single{1.0};
  CHECK(compute_c(1.0, single) == doctest::Approx(2.0));
  CHECK_THROWS_AS(compute_c(0.0, single), ConfigError);
}

TEST_CASE("c really bounds ||z||^2 over the basin") {
  const FormationGraph g = square_graph();
  const double delta = 2.7;
  const double c = compute_c(delta, g.desired_distances);
  Mt19937Source rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    // random error vector inside the basin
    std::vector<double> e(5);
    double norm2 = 0.0;
    for (double& v : e) {
      v = rng.uniform_real(-1.0, 1.0);
      norm2 += v * v;
    }
    const double scale = rng.uniform_real(0.0, delta) / std::sqrt(norm2);
    double z2 = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double d = g.desired_distances[static_cast<std::size_t>(k)];
      z2 += std::fabs(e[static_cast<std::size_t>(k)] * scale + d * d);
    }
    CHECK(z2 <= c);
  }
}

TEST_CASE("largest edge-matrix eigenvalue") {
  const FormationGraph single = FormationGraph::create(2, {{0, 1}}, {1.0});
  CHECK(compute_lambda_max(single) == doctest::Approx(2.0).epsilon(1e-12));

  const FormationGraph triangle =
      FormationGraph::create(3, {{0, 1}, {1, 2}, {0, 2}}, {1, 1, 1});
  CHECK(compute_lambda_max(triangle) == doctest::Approx(3.0).epsilon(1e-10));

  const FormationGraph g = square_graph();
  CHECK(compute_lambda_max(g) == doctest::Approx(4.0).epsilon(1e-9));

  // integer characteristic polynomial pins the whole spectrum {0,0,2,4,4}
  const linalg::Mat edge_matrix =
      linalg::gram(linalg::transpose(graph::incidence(g)));
  const std::vector<i128> coeffs = oracles::charpoly_int(edge_matrix);
  CHECK(coeffs == std::vector<i128>{1, -10, 32, -32, 0, 0});
  // lambda^2 (lambda - 2)(lambda - 4)^2 has integer roots; the solver must
  // land on them
  const std::vector<double> eig = linalg::jacobi_eigenvalues(edge_matrix);
  const double expected[] = {0.0, 0.0, 2.0, 4.0, 4.0};
  for (int i = 0; i < 5; ++i) {
    CHECK(std::fabs(eig[static_cast<std::size_t>(i)] - expected[i]) < 1e-9);
  }
}

TEST_CASE("smallest rigidity-Gram eigenvalue") {
  SUBCASE("single edge gives 2 d^2") {
    const FormationGraph single = FormationGraph::create(2, {{0, 1}}, {1.5});
    const FormationState apart{{0, 0, 1.5, 0}};
    CHECK(compute_lambda_min(single, apart) == doctest::Approx(4.5).epsilon(1e-12));
  }
  SUBCASE("square framework") {
    const FormationGraph g = square_graph();
    const double lmin = compute_lambda_min(g, unit_square());
    // exact value 3 - sqrt(5): the Gram matrix at the unit square is integer
    // and its characteristic polynomial factors as
    // (x - 2)^3 (x^2 - 6x + 4)
    CHECK(lmin == doctest::Approx(3.0 - std::sqrt(5.0)).epsilon(1e-10));
    const linalg::Mat gram =
        linalg::gram(graph::rigidity_matrix(unit_square(), g));
    const std::vector<i128> coeffs = oracles::charpoly_int(gram);
    CHECK(coeffs == std::vector<i128>{1, -12, 52, -104, 96, -32});
  }
  SUBCASE("degenerate shapes are rejected") {
    const FormationGraph tri =
        FormationGraph::create(3, {{0, 1}, {1, 2}, {0, 2}}, {1, 1, 2});
    const FormationState collinear{{0, 0, 1, 0, 2, 0}};
    CHECK_THROWS_AS(compute_lambda_min(tri, collinear), NotRigid);
  }
}

TEST_CASE("decay margin formula") {
  // with the published reference constants, sigma = 4 is just enough
  const double k4 = compute_k(4, 0.058, 4.11, 12.04);
  CHECK(k4 == doctest::Approx(0.0085032).epsilon(1e-4));
  CHECK(k4 > 0.0);
  CHECK(compute_k(1, 0.058, 4.11, 12.04) < 0.0);

  // with the constants computed from the framework itself
  const FormationGraph g = square_graph();
  const double lmin = compute_lambda_min(g, unit_square());
  const double lmax = compute_lambda_max(g);
  const double c = compute_c(2.7, g.desired_distances);
  CHECK(compute_k(4, lmin, lmax, c) == doctest::Approx(0.715770450959).epsilon(1e-9));

  SUBCASE("monotone in sigma and saturating at lambda_min") {
    double prev = compute_k(1, lmin, lmax, c);
    for (int sigma = 2; sigma <= 17; ++sigma) {
      const double k = compute_k(sigma, lmin, lmax, c);
      CHECK(k > prev);
      prev = k;
    }
    CHECK(compute_k(17, lmin, lmax, c) == doctest::Approx(lmin).epsilon(1e-12));
  }
  CHECK_THROWS_AS(compute_k(0, 1, 1, 1), ConfigError);
}

TEST_CASE("sigma selection") {
  const FormationGraph g = square_graph();
  // with the computed constants the margin turns positive at sigma = 3
  CHECK(choose_sigma(g, unit_square(), 2.7) == 3);
  const double lmin = compute_lambda_min(g, unit_square());
  const double lmax = compute_lambda_max(g);
  const double c = compute_c(2.7, g.desired_distances);
  CHECK(compute_k(2, lmin, lmax, c) < 0.0);
  CHECK(compute_k(3, lmin, lmax, c) > 0.0);
}

TEST_CASE("report rendering") {
  const FormationGraph g = square_graph();
  const StabilityReport r = analyze(g, unit_square(), 2.7, 4);
  CHECK(r.decay_certified());
  const std::string text = r.to_text();
  CHECK(text.find("lambda_min = ") != std::string::npos);
  CHECK(text.find("lambda_max = 4") != std::string::npos);
  CHECK(text.find("k = ") != std::string::npos);
  CHECK(text.find("decay_certified = true") != std::string::npos);

  const StabilityReport weak = analyze(g, unit_square(), 2.7, 1);
  CHECK_FALSE(weak.decay_certified());
}

TEST_CASE("simulated trajectories respect the certified decay") {
  // quantized loop on the square scenario; the secure loop is bit-identical
  sim::SimConfig config = sim::demo_square();
  config.mode = sim::Mode::Quantized;
  config.csv_path.clear();
  config.manifest_path.clear();
  std::vector<sim::TrajectoryRecord> records;
  const sim::RunSummary summary = sim::run(config, &records);
  REQUIRE(summary.entered_basin);
  REQUIRE(records.size() > 100);

  const double k_computed = summary.report.k;
  const double k_reference = compute_k(4, 0.058, 4.11, 12.04);
  REQUIRE(k_computed > 0.0);

  int asymptotic_steps = 0;
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    double norm2 = 0.0;
    for (double e : records[i].errors) norm2 += e * e;
    const double norm = std::sqrt(norm2);
    if (norm <= 1e-9) break;  // double-precision equilibrium band
    const double dv = (records[i + 1].lyapunov - records[i].lyapunov) / config.dt;
    // the conservative published margin holds along the whole basin
    REQUIRE(dv <= -k_reference * norm2);
    // near the equilibrium the at-shape margin holds up to discretization
    if (norm <= 0.05) {
      ++asymptotic_steps;
      REQUIRE(dv <= (-k_computed + 10.0 * config.dt) * norm2);
    }
  }
  CHECK(asymptotic_steps > 50);
  CHECK(summary.lyapunov_monotone);
}

TEST_SUITE_END();
