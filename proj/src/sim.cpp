#include "treegls/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "treegls/errors.hpp"
#include "treegls/normal.hpp"

namespace treegls {

namespace {

void validate_config(const SimConfig& cfg) {
  const int v_count = cfg.tree.vertex_count();
  if (cfg.replicates < 1) {
    throw OutOfDomain("replicates must be at least 1, got " + std::to_string(cfg.replicates));
  }
  if (static_cast<int>(cfg.true_beta_leaves.size()) != static_cast<int>(cfg.tree.leaves().size())) {
    throw DimensionMismatch("true beta given for " + std::to_string(cfg.true_beta_leaves.size()) +
                            " leaves, tree has " + std::to_string(cfg.tree.leaves().size()));
  }
  for (const auto& b : cfg.true_beta_leaves) {
    if (b.size() != cfg.n) throw DimensionMismatch("true beta block width must equal n");
  }
  if (static_cast<int>(cfg.S.size()) != v_count ||
      static_cast<int>(cfg.noise_diag.size()) != v_count) {
    throw DimensionMismatch("need S and noise for every vertex");
  }
  for (int g = 0; g < v_count; ++g) {
    if (cfg.S[g].cols() != cfg.n) {
      throw DimensionMismatch("vertex " + std::to_string(g) + ": S block width " +
                              std::to_string(cfg.S[g].cols()) + ", expected " +
                              std::to_string(cfg.n));
    }
    if (cfg.noise_diag[g].size() != cfg.S[g].rows()) {
      throw DimensionMismatch("vertex " + std::to_string(g) +
                              ": noise length does not match S rows");
    }
    for (Eigen::Index i = 0; i < cfg.noise_diag[g].size(); ++i) {
      if (!(cfg.noise_diag[g](i) > 0.0)) {
        throw NonSPDNoise("vertex " + std::to_string(g) + ": noise variance must be positive");
      }
    }
  }
  for (double a : cfg.alphas) {
    if (!(a > 0.0) || !(a < 1.0)) {
      throw OutOfDomain("alpha must lie in (0,1), got " + describe(a));
    }
  }
}

}  // namespace

std::vector<Vector> derive_true_beta(const SimConfig& cfg) {
  validate_config(cfg);
  std::vector<Vector> beta(cfg.tree.vertex_count(), Vector::Zero(cfg.n));
  const auto& leaves = cfg.tree.leaves();
  for (size_t j = 0; j < leaves.size(); ++j) beta[leaves[j]] = cfg.true_beta_leaves[j];
  for (int l = cfg.tree.depth - 1; l >= 0; --l) {
    for (int g : cfg.tree.levels[l]) {
      for (int c : cfg.tree.children[g]) beta[g] += beta[c];
    }
  }
  return beta;
}

double true_query_value(const Tree& tree, const std::vector<Vector>& true_beta_leaves,
                        const RegionQuery& rq) {
  const auto& leaves = tree.leaves();
  std::unordered_map<int, int> leaf_index;
  for (size_t j = 0; j < leaves.size(); ++j) leaf_index[leaves[j]] = static_cast<int>(j);
  double truth = 0.0;
  for (VertexId v : rq.H) {
    auto it = leaf_index.find(v);
    if (it == leaf_index.end()) {
      throw NotALeaf("query region vertex " + std::to_string(v) + " is not a leaf");
    }
    truth += rq.q.dot(true_beta_leaves[it->second]);
  }
  return truth;
}

std::vector<VertexMeasurements> simulate_measurements(const SimConfig& cfg, int replicate) {
  const std::vector<Vector> beta = derive_true_beta(cfg);
  std::vector<VertexMeasurements> meas(cfg.tree.vertex_count());
  for (int g = 0; g < cfg.tree.vertex_count(); ++g) {
    CounterRng rng(cfg.rng_seed, static_cast<std::uint64_t>(g),
                   static_cast<std::uint64_t>(replicate));
    VertexMeasurements& m = meas[g];
    m.S = cfg.S[g];
    m.diagonal_noise = true;
    m.noise_diag = cfg.noise_diag[g];
    m.y = m.S * beta[g];
    for (Eigen::Index i = 0; i < m.y.size(); ++i) {
      if (cfg.noise_kind == NoiseKind::kContinuousGaussian) {
        m.y(i) += std::sqrt(m.noise_diag(i)) * rng.next_normal();
      } else {
        m.y(i) += static_cast<double>(sample_discrete_gaussian(m.noise_diag(i), rng));
      }
    }
  }
  return meas;
}

CoverageReport coverage_experiment(const SimConfig& cfg, const std::vector<RegionQuery>& queries,
                                   int threads) {
  validate_config(cfg);
  // One report cell per (query, alpha); clamped and unclamped variants are
  // derived from the same interval, matching the estimator's clamp step.
  std::vector<std::pair<int, double>> cells;
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    if (cfg.alphas.empty()) {
      cells.emplace_back(static_cast<int>(qi), queries[qi].alpha);
    } else {
      for (double a : cfg.alphas) cells.emplace_back(static_cast<int>(qi), a);
    }
  }

  std::vector<double> truths(queries.size());
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    truths[qi] = true_query_value(cfg.tree, cfg.true_beta_leaves, queries[qi]);
  }

  // Per replicate and cell: hit/width for the raw and the clamped interval.
  struct CellSample {
    bool hit = false;
    double width = 0.0;
    bool hit_clamped = false;
    double width_clamped = 0.0;
  };
  std::vector<std::vector<CellSample>> samples(cfg.replicates,
                                               std::vector<CellSample>(cells.size()));
  std::vector<double> pooled_z(static_cast<size_t>(cfg.replicates) * queries.size());

  const auto run_replicate = [&](int rep) {
    const auto meas = simulate_measurements(cfg, rep);
    const StateStore store = run_two_pass(cfg.tree, meas, 1);
    // The estimate and variance are alpha-independent, so the covariance
    // work runs once per query; each cell only rescales the interval.
    std::vector<double> estimates(queries.size());
    std::vector<double> sigmas(queries.size());
    for (size_t qi = 0; qi < queries.size(); ++qi) {
      RegionQuery rq = queries[qi];
      rq.clamp_nonnegative = false;
      const CIResult r = estimate_query(store, rq);
      if (!(r.variance > 0.0)) {
        throw ZeroVariance("query " + std::to_string(qi) + " has zero variance");
      }
      estimates[qi] = r.estimate;
      sigmas[qi] = std::sqrt(r.variance);
      pooled_z[static_cast<size_t>(rep) * queries.size() + qi] =
          (r.estimate - truths[qi]) / sigmas[qi];
    }
    for (size_t ci = 0; ci < cells.size(); ++ci) {
      const int qi = cells[ci].first;
      const double c = sigmas[qi] * normal_quantile(1.0 - cells[ci].second / 2.0);
      const double lower = estimates[qi] - c;
      const double upper = estimates[qi] + c;
      const double truth = truths[qi];
      CellSample& s = samples[rep][ci];
      s.hit = lower <= truth && truth <= upper;
      s.width = upper - lower;
      const double lo = std::max(lower, 0.0);
      const double hi = std::max(upper, 0.0);
      s.hit_clamped = lo <= truth && truth <= hi;
      s.width_clamped = hi - lo;
    }
  };

#ifdef _OPENMP
  if (threads != 1) {
    std::vector<std::exception_ptr> errors(cfg.replicates);
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      try {
        run_replicate(rep);
      } catch (...) {
        errors[rep] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else
#endif
  {
    (void)threads;
    for (int rep = 0; rep < cfg.replicates; ++rep) run_replicate(rep);
  }

  CoverageReport report;
  report.pooled_z = std::move(pooled_z);
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    CoverageRow raw{cells[ci].first, cells[ci].second, false, 0.0, 0.0, cfg.replicates};
    CoverageRow clamped{cells[ci].first, cells[ci].second, true, 0.0, 0.0, cfg.replicates};
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const CellSample& s = samples[rep][ci];
      raw.coverage += s.hit ? 1.0 : 0.0;
      raw.mean_width += s.width;
      clamped.coverage += s.hit_clamped ? 1.0 : 0.0;
      clamped.mean_width += s.width_clamped;
    }
    raw.coverage /= cfg.replicates;
    raw.mean_width /= cfg.replicates;
    clamped.coverage /= cfg.replicates;
    clamped.mean_width /= cfg.replicates;
    report.rows.push_back(raw);
    report.rows.push_back(clamped);
  }
  return report;
}

std::vector<double> z_scores(const StateStore& store, const std::vector<Vector>& true_beta_leaves,
                             const std::vector<RegionQuery>& queries) {
  std::vector<double> z;
  z.reserve(queries.size());
  for (const RegionQuery& rq : queries) {
    const CIResult r = estimate_query(store, rq);
    if (!(r.variance > 0.0)) {
      throw ZeroVariance("query variance is zero; Z-score undefined");
    }
    const double truth = true_query_value(store.tree, true_beta_leaves, rq);
    z.push_back((r.estimate - truth) / std::sqrt(r.variance));
  }
  return z;
}

std::vector<std::pair<double, double>> qq_export(const std::vector<double>& z) {
  if (z.empty()) throw EmptyInput("no Z-scores to export");
  std::vector<double> sorted = z;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(sorted.size());
  const double count = static_cast<double>(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i) {
    pairs.emplace_back(normal_quantile((static_cast<double>(i) + 0.5) / count), sorted[i]);
  }
  return pairs;
}

}  // namespace treegls
