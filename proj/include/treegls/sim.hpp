#pragma once

// Synthetic-measurement generation and the validation study around the
// estimator: empirical CI coverage, average widths, Z-scores, and Q-Q data.

#include <cstdint>
#include <utility>
#include <vector>

#include "treegls/model.hpp"
#include "treegls/query.hpp"
#include "treegls/rng.hpp"
#include "treegls/spine.hpp"
#include "treegls/twopass.hpp"

namespace treegls {

enum class NoiseKind { kContinuousGaussian, kDiscreteGaussian };

struct SimConfig {
  Tree tree;
  int n = 1;
  // Ground truth lives at the leaves (ascending leaf order); interior truth
  // is their sum, so the truth is consistent by construction.
  std::vector<Vector> true_beta_leaves;
  std::vector<Matrix> S;           // per vertex
  std::vector<Vector> noise_diag;  // per vertex, diagonal variances
  NoiseKind noise_kind = NoiseKind::kContinuousGaussian;
  int replicates = 1;
  std::vector<double> alphas;  // empty: use each query's own alpha
  std::uint64_t rng_seed = 0;
};

struct CoverageRow {
  int query_index = 0;
  double alpha = 0.0;
  bool clamped = false;
  double coverage = 0.0;    // fraction of replicate CIs containing the truth
  double mean_width = 0.0;  // average upper - lower
  int replicates = 0;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  // Standardized errors pooled over replicates, replicate-major with one
  // entry per query; feeds the Q-Q export.
  std::vector<double> pooled_z;
};

// True per-vertex histograms: leaves as configured, interiors summed bottom-up.
std::vector<Vector> derive_true_beta(const SimConfig& cfg);

// Exact truth of a region query, sum over H of q^T beta(leaf).
// true_beta_leaves is in ascending leaf order.
double true_query_value(const Tree& tree, const std::vector<Vector>& true_beta_leaves,
                        const RegionQuery& rq);

// One replicate's noisy measurements: y(g) = S(g) beta(g) + draw, with
// independent per-vertex draws from the (seed, vertex, replicate) substream.
std::vector<VertexMeasurements> simulate_measurements(const SimConfig& cfg, int replicate);

// Runs `replicates` rounds of simulate -> estimate -> query and tallies
// coverage and width per (query, alpha, clamp) cell. Replicates run in
// parallel when threads allows; per-replicate results are reduced in
// replicate order, so the report is independent of the thread count.
CoverageReport coverage_experiment(const SimConfig& cfg, const std::vector<RegionQuery>& queries,
                                   int threads = 0);

// Standardized errors (estimate - truth) / sqrt(variance), one per query.
std::vector<double> z_scores(const StateStore& store, const std::vector<Vector>& true_beta_leaves,
                             const std::vector<RegionQuery>& queries);

// Sorted z paired with the standard normal quantile at (i+0.5)/N.
std::vector<std::pair<double, double>> qq_export(const std::vector<double>& z);

}  // namespace treegls
