#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/test_support.hpp"
#include "treegls/errors.hpp"
#include "treegls/sim.hpp"

using namespace treegls;

namespace {

// Root with two leaves, n = 1, scalar direct observation at every vertex.
SimConfig small_config(double leaf1 = 5.0, double leaf2 = 3.0, double var = 1.0) {
  SimConfig cfg;
  cfg.tree = build_tree({{1, 0}, {2, 0}}, 0);
  cfg.n = 1;
  cfg.true_beta_leaves = {Vector::Constant(1, leaf1), Vector::Constant(1, leaf2)};
  cfg.S.assign(3, Matrix::Constant(1, 1, 1.0));
  cfg.noise_diag.assign(3, Vector::Constant(1, var));
  cfg.replicates = 1;
  cfg.rng_seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("derive_true_beta sums leaves bottom-up") {
  const SimConfig cfg = small_config(5.0, 3.0);
  const auto beta = derive_true_beta(cfg);
  CHECK(beta[0](0) == 8.0);
  CHECK(beta[1](0) == 5.0);
  CHECK(beta[2](0) == 3.0);

  SimConfig deep;
  deep.tree = build_tree({{1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 2}, {6, 2}}, 0);
  deep.n = 2;
  deep.true_beta_leaves.assign(4, Vector::Zero(2));
  for (int j = 0; j < 4; ++j) deep.true_beta_leaves[j] << j + 1, 10.0 * (j + 1);
  deep.S.assign(7, Matrix::Identity(2, 2));
  deep.noise_diag.assign(7, Vector::Constant(2, 1.0));
  const auto b = derive_true_beta(deep);
  CHECK(b[0](0) == 10.0);
  CHECK(b[0](1) == 100.0);
  CHECK(b[1](0) == 3.0);  // leaves 3 and 4
  CHECK(b[2](1) == 70.0);
}

TEST_CASE("true_query_value sums q against the leaf truths") {
  const SimConfig cfg = small_config(5.0, 3.0);
  const Vector q = Vector::Constant(1, 2.0);
  CHECK(true_query_value(cfg.tree, cfg.true_beta_leaves, {q, {1, 2}, 0.05, false}) == 16.0);
  CHECK(true_query_value(cfg.tree, cfg.true_beta_leaves, {q, {2}, 0.05, false}) == 6.0);
  CHECK_THROWS_AS(true_query_value(cfg.tree, cfg.true_beta_leaves, {q, {0}, 0.05, false}),
                  NotALeaf);
}

TEST_CASE("simulate_measurements is deterministic per replicate") {
  const SimConfig cfg = small_config();
  const auto a = simulate_measurements(cfg, 3);
  const auto b = simulate_measurements(cfg, 3);
  const auto c = simulate_measurements(cfg, 4);
  bool any_diff = false;
  for (int v = 0; v < 3; ++v) {
    CHECK(a[v].y == b[v].y);
    any_diff |= a[v].y != c[v].y;
  }
  CHECK(any_diff);
}

TEST_CASE("simulated noise vanishes with the variance") {
  SimConfig cfg = small_config(5.0, 3.0, 1e-18);
  const auto meas = simulate_measurements(cfg, 0);
  CHECK(std::abs(meas[0].y(0) - 8.0) < 1e-6);
  CHECK(std::abs(meas[1].y(0) - 5.0) < 1e-6);
  CHECK(std::abs(meas[2].y(0) - 3.0) < 1e-6);
  // The declared noise is what the estimator sees, unchanged.
  CHECK(meas[0].noise_diag(0) == 1e-18);
}

TEST_CASE("simulated measurements are centered on S beta") {
  SimConfig cfg = small_config(5.0, 3.0, 4.0);
  const int reps = 4000;
  double sum = 0.0;
  for (int rep = 0; rep < reps; ++rep) sum += simulate_measurements(cfg, rep)[0].y(0);
  // Root truth 8, sd 2: the replicate mean lands within 5 standard errors.
  CHECK(std::abs(sum / reps - 8.0) < 5.0 * 2.0 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("discrete noise produces integer offsets") {
  SimConfig cfg = small_config(5.0, 3.0, 4.0);
  cfg.noise_kind = NoiseKind::kDiscreteGaussian;
  const auto meas = simulate_measurements(cfg, 7);
  for (int v = 0; v < 3; ++v) {
    const double offset = meas[v].y(0) - (v == 0 ? 8.0 : (v == 1 ? 5.0 : 3.0));
    CHECK(offset == std::round(offset));
  }
}

TEST_CASE("coverage_experiment attains nominal coverage") {
  SimConfig cfg = small_config(5.0, 3.0, 1.0);
  cfg.replicates = 400;
  const std::vector<RegionQuery> queries = {{Vector::Constant(1, 1.0), {1, 2}, 0.1, false}};
  const CoverageReport report = coverage_experiment(cfg, queries, 1);
  REQUIRE(report.rows.size() == 2);  // raw + clamped for the single cell
  const CoverageRow& raw = report.rows[0];
  CHECK(raw.query_index == 0);
  CHECK(raw.alpha == 0.1);
  CHECK(!raw.clamped);
  CHECK(report.rows[1].clamped);
  CHECK(raw.replicates == 400);
  // Exact-variance CIs: binomial(400, 0.9) stays within 5 sigma of nominal.
  CHECK(std::abs(raw.coverage - 0.9) < 5.0 * std::sqrt(0.9 * 0.1 / 400.0));
  // Truth is far from 0, so clamping never moves an endpoint across it.
  CHECK(report.rows[1].coverage == raw.coverage);
  CHECK(report.pooled_z.size() == 400);

  // Width is 2 z_{0.95} sigma with sigma^2 = 2/3 at the root region.
  const double want_width = 2.0 * 1.6448536269514722 * std::sqrt(2.0 / 3.0);
  CHECK(raw.mean_width == doctest::Approx(want_width).epsilon(1e-9));
}

TEST_CASE("coverage_experiment is thread-count invariant") {
  SimConfig cfg = small_config();
  cfg.replicates = 60;
  const std::vector<RegionQuery> queries = {{Vector::Constant(1, 1.0), {1, 2}, 0.05, false},
                                            {Vector::Constant(1, 1.0), {1}, 0.2, false}};
  const CoverageReport one = coverage_experiment(cfg, queries, 1);
  const CoverageReport four = coverage_experiment(cfg, queries, 4);
  REQUIRE(one.rows.size() == four.rows.size());
  for (size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].coverage == four.rows[i].coverage);
    CHECK(one.rows[i].mean_width == four.rows[i].mean_width);
  }
  REQUIRE(one.pooled_z.size() == four.pooled_z.size());
  for (size_t i = 0; i < one.pooled_z.size(); ++i) CHECK(one.pooled_z[i] == four.pooled_z[i]);
}

TEST_CASE("config-level alphas expand into one cell per query and alpha") {
  SimConfig cfg = small_config();
  cfg.replicates = 5;
  cfg.alphas = {0.1, 0.05};
  const std::vector<RegionQuery> queries = {{Vector::Constant(1, 1.0), {1, 2}, 0.5, false},
                                            {Vector::Constant(1, 1.0), {2}, 0.5, false}};
  const CoverageReport report = coverage_experiment(cfg, queries, 1);
  REQUIRE(report.rows.size() == 8);  // 2 queries x 2 alphas x (raw, clamped)
  CHECK(report.rows[0].query_index == 0);
  CHECK(report.rows[0].alpha == 0.1);
  CHECK(report.rows[2].alpha == 0.05);
  CHECK(report.rows[4].query_index == 1);
}

TEST_CASE("clamped coverage can only shed misses below zero") {
  // Truth 0 at leaf 1: raw intervals sometimes sit entirely below zero, the
  // clamped variant pulls their upper endpoint back to the truth.
  SimConfig cfg = small_config(0.0, 3.0, 1.0);
  cfg.replicates = 300;
  const std::vector<RegionQuery> queries = {{Vector::Constant(1, 1.0), {1}, 0.5, false}};
  const CoverageReport report = coverage_experiment(cfg, queries, 1);
  CHECK(report.rows[1].coverage >= report.rows[0].coverage);
  CHECK(report.rows[1].mean_width <= report.rows[0].mean_width);
  CHECK(report.rows[1].coverage > report.rows[0].coverage);  // 50% CIs miss often at truth 0
}

TEST_CASE("coverage_experiment validates the configuration") {
  SimConfig cfg = small_config();
  const std::vector<RegionQuery> queries = {{Vector::Constant(1, 1.0), {1, 2}, 0.05, false}};
  cfg.replicates = 0;
  CHECK_THROWS_AS(coverage_experiment(cfg, queries, 1), OutOfDomain);
  cfg = small_config();
  cfg.true_beta_leaves.pop_back();
  CHECK_THROWS_AS(coverage_experiment(cfg, queries, 1), DimensionMismatch);
  cfg = small_config();
  cfg.noise_diag[1](0) = 0.0;
  CHECK_THROWS_AS(coverage_experiment(cfg, queries, 1), NonSPDNoise);
  cfg = small_config();
  cfg.alphas = {1.5};
  CHECK_THROWS_AS(coverage_experiment(cfg, queries, 1), OutOfDomain);
}

TEST_CASE("z_scores standardize against the truth") {
  const SimConfig cfg = small_config(5.0, 3.0);
  const auto meas = simulate_measurements(cfg, 0);
  const StateStore store = run_two_pass(cfg.tree, meas, 1);
  const std::vector<RegionQuery> queries = {{Vector::Constant(1, 1.0), {1, 2}, 0.05, false},
                                            {Vector::Constant(1, 1.0), {1}, 0.05, false}};
  const auto z = z_scores(store, cfg.true_beta_leaves, queries);
  REQUIRE(z.size() == 2);
  const CIResult r0 = estimate_query(store, queries[0]);
  CHECK(z[0] == doctest::Approx((r0.estimate - 8.0) / std::sqrt(r0.variance)).epsilon(1e-12));

  // A truth equal to the estimate gives a zero score.
  std::vector<Vector> exact = {Vector::Constant(1, estimate_query(store, queries[1]).estimate),
                               cfg.true_beta_leaves[1]};
  CHECK(z_scores(store, exact, {queries[1]})[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("z_scores reject a zero-variance query") {
  StateStore store;
  store.tree = build_tree({}, 0);
  store.n = 1;
  store.states.resize(1);
  store.states[0].beta_final = Vector::Constant(1, 1.0);
  store.states[0].var_final = Matrix::Zero(1, 1);
  const std::vector<RegionQuery> queries = {{Vector::Constant(1, 1.0), {0}, 0.05, false}};
  CHECK_THROWS_AS(z_scores(store, {Vector::Constant(1, 1.0)}, queries), ZeroVariance);
}

TEST_CASE("qq_export pairs sorted scores with centered normal quantiles") {
  const auto single = qq_export({0.0});
  REQUIRE(single.size() == 1);
  CHECK(single[0].first == 0.0);  // quantile(0.5)
  CHECK(single[0].second == 0.0);

  const auto pair = qq_export({1.7, -1.7});
  REQUIRE(pair.size() == 2);
  CHECK(pair[0].second == -1.7);
  CHECK(pair[1].second == 1.7);
  CHECK(pair[0].first == doctest::Approx(-pair[1].first).epsilon(1e-12));
  CHECK(pair[0].first == doctest::Approx(normal_quantile(0.25)).epsilon(1e-12));

  CHECK_THROWS_AS(qq_export({}), EmptyInput);
}
