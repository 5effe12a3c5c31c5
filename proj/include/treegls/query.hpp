#pragma once

// Linear queries over leaf regions: point estimate, exact variance through
// the covariance engine, and a normal confidence interval with optional
// nonnegative clamping of the endpoints. Read-only over the store.

#include <utility>
#include <vector>

#include "treegls/covariance.hpp"
#include "treegls/normal.hpp"
#include "treegls/twopass.hpp"

namespace treegls {

struct RegionQuery {
  Vector q;                        // length n
  std::vector<VertexId> H;         // nonempty set of leaves
  double alpha = 0.05;             // CI level 1 - alpha
  bool clamp_nonnegative = false;  // clamp interval endpoints (never the estimate) at 0
};

struct CIResult {
  double estimate = 0.0;
  double variance = 0.0;  // >= 0 after the clamp rule below
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.0;
};

// Replaces every complete sibling set inside H by its parent, repeatedly,
// yielding the minimal antichain covering exactly H. The summed estimate and
// variance are unchanged (parents equal their children's sums); the pairwise
// covariance work shrinks. Throws NotALeaf if H strays off the leaf level.
std::vector<VertexId> collapse_region(const Tree& tree, const std::vector<VertexId>& H);

// Point estimate sum_{u in H'} q^T beta_final(u), variance over all pairs of
// the collapsed region, interval endpoints estimate +- sqrt(var) *
// normal_quantile(1 - alpha/2). Accumulated variance in (-1e-8, 0) is
// rounding noise and clamps to 0; at or below -1e-8 raises NegativeVariance.
CIResult estimate_query(const StateStore& store, const RegionQuery& rq);

// (sum of final estimates over H, variance of that sum) via the level-by-
// level absorption recursion: children in the region are merged into their
// parent with effective weight and cross-variance blocks, so cost is linear
// in the region's ancestor count instead of quadratic in |H|. Equivalent to
// the pairwise loop in estimate_query (tested, not assumed).
std::pair<Vector, Matrix> aggregate_region(const StateStore& store,
                                           const std::vector<VertexId>& H);

// Inverse-variance fusion of two independent runs' region estimates.
std::pair<Vector, Matrix> combine_runs(const Vector& b0, const Matrix& v0, const Vector& b1,
                                       const Matrix& v1);

}  // namespace treegls
