#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/test_support.hpp"
#include "treegls/errors.hpp"
#include "treegls/hay.hpp"
#include "treegls/oracle.hpp"

using namespace treegls;

namespace {

std::vector<VertexMeasurements> worked_example_meas() {
  std::vector<VertexMeasurements> meas(3);
  const double ys[3] = {3.0, 1.0, 1.0};
  for (int v = 0; v < 3; ++v) {
    meas[v].S = Matrix::Constant(1, 1, 1.0);
    meas[v].y = Vector::Constant(1, ys[v]);
    meas[v].noise_diag = Vector::Constant(1, 1.0);
  }
  return meas;
}

}  // namespace

TEST_CASE("stacked system for the worked example") {
  const Tree tree = build_tree({{1, 0}, {2, 0}}, 0);
  const StackedSystem sys = build_stacked_system(tree, worked_example_meas());
  CHECK(sys.n == 1);
  CHECK(sys.leaf_order == std::vector<int>{1, 2});
  REQUIRE(sys.S_full.rows() == 3);
  REQUIRE(sys.S_full.cols() == 2);
  Matrix want(3, 2);
  want << 1, 1, 1, 0, 0, 1;
  CHECK(sys.S_full == want);
  CHECK(sys.y_full(0) == 3.0);
  CHECK(sys.y_full(1) == 1.0);
  CHECK(sys.y_full(2) == 1.0);
  CHECK(sys.V_full == Matrix::Identity(3, 3));
}

TEST_CASE("stacked system rows cover descendant leaves") {
  // Depth-2 complete binary tree: the root row spans all four leaf columns,
  // internal rows span their own pair, leaf rows are unit vectors.
  const Tree tree = build_tree({{1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 2}, {6, 2}}, 0);
  std::vector<VertexMeasurements> meas(7);
  for (int v = 0; v < 7; ++v) {
    meas[v].S = Matrix::Constant(1, 1, 1.0);
    meas[v].y = Vector::Constant(1, static_cast<double>(v));
    meas[v].noise_diag = Vector::Constant(1, 1.0);
  }
  const StackedSystem sys = build_stacked_system(tree, meas);
  REQUIRE(sys.S_full.rows() == 7);
  REQUIRE(sys.S_full.cols() == 4);
  Matrix want(7, 4);
  want << 1, 1, 1, 1,  // 0
      1, 1, 0, 0,      // 1
      0, 0, 1, 1,      // 2
      1, 0, 0, 0,      // 3
      0, 1, 0, 0,      // 4
      0, 0, 1, 0,      // 5
      0, 0, 0, 1;      // 6
  CHECK(sys.S_full == want);
}

TEST_CASE("single-vertex system is the local system") {
  const Tree tree = build_tree({}, 0);
  std::vector<VertexMeasurements> meas(1);
  CounterRng rng(31, 0, 0);
  meas[0] = testsupport::random_measurements(rng, tree, 2, false)[0];
  const StackedSystem sys = build_stacked_system(tree, meas);
  CHECK(sys.S_full == meas[0].S);
  CHECK(sys.y_full == meas[0].y);
  CHECK(sys.V_full == Matrix(meas[0].noise_diag.asDiagonal()));
}

TEST_CASE("dense_gls on the worked example") {
  const Tree tree = build_tree({{1, 0}, {2, 0}}, 0);
  const auto [beta, var] = dense_gls(build_stacked_system(tree, worked_example_meas()));
  REQUIRE(beta.size() == 2);
  CHECK(beta(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(beta(1) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  Matrix want(2, 2);
  want << 2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0;
  CHECK(testsupport::rel_dev(var, want) < 1e-13);
}

TEST_CASE("identity design echoes the data") {
  StackedSystem sys;
  sys.n = 1;
  sys.leaf_order = {0};
  sys.S_full = Matrix::Identity(3, 3);
  sys.y_full = Vector::LinSpaced(3, 1.0, 3.0);
  sys.V_full = Matrix::Identity(3, 3);
  const auto [beta, var] = dense_gls(sys);
  CHECK(beta == sys.y_full);
  CHECK(testsupport::rel_dev(var, Matrix::Identity(3, 3)) < 1e-14);

  sys.V_full *= 4.0;
  const auto [beta4, var4] = dense_gls(sys);
  CHECK(testsupport::rel_dev(beta4, beta) < 1e-14);
  CHECK(testsupport::rel_dev(var4, Matrix(4.0 * Matrix::Identity(3, 3))) < 1e-14);
}

TEST_CASE("GLS residuals are orthogonal in the V-inner product") {
  CounterRng rng(32, 0, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const Tree tree = testsupport::random_tree(rng, 1 + static_cast<int>(rng.next_below(2)), 3);
    const int n = 1 + static_cast<int>(rng.next_below(3));
    const auto meas = testsupport::random_measurements(rng, tree, n, rep % 2 == 0);
    const StackedSystem sys = build_stacked_system(tree, meas);
    const auto [beta, var] = dense_gls(sys);
    const Vector resid = sys.y_full - sys.S_full * beta;
    const Vector grad = sys.S_full.transpose() * sys.V_full.llt().solve(resid);
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, sys.y_full.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("oracle_query sums the right blocks") {
  const Tree tree = build_tree({{1, 0}, {2, 0}}, 0);
  const StackedSystem sys = build_stacked_system(tree, worked_example_meas());
  const auto [beta, var] = dense_gls(sys);
  const Vector q = Vector::Constant(1, 1.0);

  const auto [est, v] = oracle_query(beta, var, q, {1, 2}, sys.leaf_order);
  CHECK(est == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  CHECK(v == doctest::Approx(2.0 / 3.0).epsilon(1e-13));

  const auto [est1, v1] = oracle_query(beta, var, q, {1}, sys.leaf_order);
  CHECK(est1 == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(v1 == doctest::Approx(2.0 / 3.0).epsilon(1e-13));

  const auto [est0, v0] = oracle_query(beta, var, q, {}, sys.leaf_order);
  CHECK(est0 == 0.0);
  CHECK(v0 == 0.0);

  const auto [estz, vz] = oracle_query(beta, var, Vector::Zero(1), {1, 2}, sys.leaf_order);
  CHECK(estz == 0.0);
  CHECK(vz == 0.0);

  CHECK_THROWS_AS(oracle_query(beta, var, q, {7}, sys.leaf_order), UnknownVertex);
}

TEST_CASE("shape and rank errors") {
  const Tree tree = build_tree({{1, 0}, {2, 0}}, 0);
  auto meas = worked_example_meas();

  std::vector<VertexMeasurements> short_meas(meas.begin(), meas.begin() + 2);
  CHECK_THROWS_AS(build_stacked_system(tree, short_meas), DimensionMismatch);

  auto wide = meas;
  wide[1].S = Matrix::Identity(2, 2);
  wide[1].y = Vector::Zero(2);
  wide[1].noise_diag = Vector::Constant(2, 1.0);
  CHECK_THROWS_AS(build_stacked_system(tree, wide), DimensionMismatch);

  // Remove the leaf rows: the root row alone cannot identify two leaves.
  StackedSystem sys = build_stacked_system(tree, meas);
  sys.S_full.row(1).setZero();
  sys.S_full.row(2).setZero();
  CHECK_THROWS_AS(dense_gls(sys), RankDeficient);

  sys = build_stacked_system(tree, meas);
  sys.V_full(1, 1) = -1.0;
  CHECK_THROWS_AS(dense_gls(sys), NonSPDNoise);
}

TEST_CASE("dense feasibility gate") {
  // 1000 leaves at n = 1 exceeds the 512-column budget.
  const Tree tree = uniform_tree(10, 3);
  std::vector<VertexMeasurements> meas(tree.vertex_count());
  for (int v = 0; v < tree.vertex_count(); ++v) {
    meas[v].S = Matrix::Constant(1, 1, 1.0);
    meas[v].y = Vector::Zero(1);
    meas[v].noise_diag = Vector::Constant(1, 1.0);
  }
  CHECK_THROWS_AS(build_stacked_system(tree, meas), InfeasibleDenseSize);
}
