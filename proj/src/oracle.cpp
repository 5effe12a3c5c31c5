#include "treegls/oracle.hpp"

#include <string>
#include <unordered_map>

#include "treegls/errors.hpp"

namespace treegls {

StackedSystem build_stacked_system(const Tree& tree, const std::vector<VertexMeasurements>& meas) {
  const int v_count = tree.vertex_count();
  if (static_cast<int>(meas.size()) != v_count) {
    throw DimensionMismatch("got measurements for " + std::to_string(meas.size()) + " of " +
                            std::to_string(v_count) + " vertices");
  }

  StackedSystem sys;
  sys.leaf_order = tree.leaves();
  sys.n = meas[tree.root].n();

  std::unordered_map<int, int> leaf_col;
  for (size_t j = 0; j < sys.leaf_order.size(); ++j)
    leaf_col[sys.leaf_order[j]] = static_cast<int>(j);

  int total_rows = 0;
  for (int g = 0; g < v_count; ++g) {
    if (meas[g].n() != sys.n) {
      throw DimensionMismatch("vertex " + std::to_string(g) + " has block width " +
                              std::to_string(meas[g].n()) + ", expected " + std::to_string(sys.n));
    }
    total_rows += meas[g].m();
  }
  const int total_cols = sys.n * static_cast<int>(sys.leaf_order.size());
  if (total_cols > kMaxDenseColumns || total_rows > kMaxDenseRows) {
    throw InfeasibleDenseSize("stacked system is " + std::to_string(total_rows) + "x" +
                              std::to_string(total_cols) + "; dense gate is " +
                              std::to_string(kMaxDenseRows) + "x" +
                              std::to_string(kMaxDenseColumns));
  }

  sys.S_full = Matrix::Zero(total_rows, total_cols);
  sys.y_full.resize(total_rows);
  sys.V_full = Matrix::Zero(total_rows, total_rows);

  int row = 0;
  for (int g = 0; g < v_count; ++g) {
    const auto& mg = meas[g];
    const int m = mg.m();
    // Vertex g measures the sum of its descendant leaves, so its S block
    // repeats in each of their column blocks.
    for (int leaf : descendant_leaves(tree, g)) {
      sys.S_full.block(row, sys.n * leaf_col.at(leaf), m, sys.n) = mg.S;
    }
    sys.y_full.segment(row, m) = mg.y;
    if (mg.diagonal_noise) {
      sys.V_full.block(row, row, m, m) = mg.noise_diag.asDiagonal();
    } else {
      sys.V_full.block(row, row, m, m) = mg.noise_full;
    }
    row += m;
  }
  return sys;
}

std::pair<Vector, Matrix> dense_gls(const StackedSystem& sys) {
  Eigen::LLT<Matrix> v_llt(sys.V_full);
  if (v_llt.info() != Eigen::Success) {
    throw NonSPDNoise("stacked noise matrix is not positive definite");
  }
  const Matrix vinv_s = v_llt.solve(sys.S_full);
  const Matrix gram = sys.S_full.transpose() * vinv_s;
  const Vector rhs = sys.S_full.transpose() * v_llt.solve(sys.y_full);

  Eigen::LLT<Matrix> g_llt(0.5 * (gram + gram.transpose()));
  if (g_llt.info() != Eigen::Success) {
    throw RankDeficient("stacked design matrix is rank deficient");
  }
  Vector beta = g_llt.solve(rhs);
  Matrix var = g_llt.solve(Matrix::Identity(gram.rows(), gram.cols()));
  var = 0.5 * (var + var.transpose());
  return {std::move(beta), std::move(var)};
}

std::pair<double, double> oracle_query(const Vector& beta, const Matrix& var, const Vector& q,
                                       const std::vector<VertexId>& H,
                                       const std::vector<int>& leaf_order) {
  const int n = static_cast<int>(q.size());
  const int blocks = static_cast<int>(leaf_order.size());
  if (beta.size() != n * blocks || var.rows() != beta.size() || var.cols() != beta.size()) {
    throw DimensionMismatch("oracle query: beta/var size does not match n * leaf count");
  }
  std::unordered_map<int, int> leaf_col;
  for (int j = 0; j < blocks; ++j) leaf_col[leaf_order[j]] = j;

  Vector hq = Vector::Zero(beta.size());
  for (VertexId leaf : H) {
    auto it = leaf_col.find(leaf);
    if (it == leaf_col.end()) {
      throw UnknownVertex("region vertex " + std::to_string(leaf) + " is not a leaf");
    }
    hq.segment(n * it->second, n) = q;
  }
  return {hq.dot(beta), hq.dot(var * hq)};
}

}  // namespace treegls
