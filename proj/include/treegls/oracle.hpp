#pragma once

// Brute-force dense GLS on the fully stacked system. Ground truth for the
// equivalence tests: every vertex measurement becomes a row block whose
// column blocks select the vertex's descendant leaves, and the whole system
// is solved at once. Deliberately shares no solver code with the two-pass
// path (Eigen LLT here, hand-rolled Cholesky there).

#include <utility>
#include <vector>

#include "treegls/linalg.hpp"
#include "treegls/model.hpp"
#include "treegls/spine.hpp"

namespace treegls {

struct StackedSystem {
  Matrix S_full;                // M x N, N = n * leaf count
  Vector y_full;                // length M
  Matrix V_full;                // M x M block diagonal
  std::vector<int> leaf_order;  // leaf ids ascending; column block j <-> leaf_order[j]
  int n = 0;                    // per-vertex block width
};

// Dense feasibility gate: beyond this the stacked solve is the very thing
// the recursive estimator exists to avoid.
inline constexpr int kMaxDenseColumns = 512;
inline constexpr int kMaxDenseRows = 4096;

// Stacks every vertex's (S, y, V) into one system over the leaf blocks.
// Throws InfeasibleDenseSize past the gate above.
StackedSystem build_stacked_system(const Tree& tree, const std::vector<VertexMeasurements>& meas);

// beta = (S^T V^-1 S)^-1 S^T V^-1 y and var = (S^T V^-1 S)^-1.
// Throws RankDeficient when the stacked design loses column rank.
std::pair<Vector, Matrix> dense_gls(const StackedSystem& sys);

// Query form: estimate (h (x) q)^T beta and its variance, with h the 0/1
// indicator of H over leaf_order.
std::pair<double, double> oracle_query(const Vector& beta, const Matrix& var, const Vector& q,
                                       const std::vector<VertexId>& H,
                                       const std::vector<int>& leaf_order);

}  // namespace treegls
