// Shared helpers for the test binaries: relative deviation against a
// reference, deterministic random problem generators, and marginals of the
// dense oracle solution.

#pragma once

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "treegls/linalg.hpp"
#include "treegls/model.hpp"
#include "treegls/oracle.hpp"
#include "treegls/rng.hpp"
#include "treegls/spine.hpp"

namespace testsupport {

using treegls::Matrix;
using treegls::Tree;
using treegls::Vector;
using treegls::VertexMeasurements;

inline double rel_dev(double a, double ref) {
  return std::abs(a - ref) / std::max(1.0, std::abs(ref));
}

inline double rel_dev(const Vector& a, const Vector& ref) {
  return (a - ref).norm() / std::max(1.0, ref.norm());
}

inline double rel_dev(const Matrix& a, const Matrix& ref) {
  return (a - ref).norm() / std::max(1.0, ref.norm());
}

// Random tree with dense breadth-first ids (vertex 0 is the root) and all
// leaves at the same depth. Every internal vertex gets 1..max_fanout children.
inline Tree random_tree(treegls::CounterRng& rng, int depth, int max_fanout) {
  std::vector<std::pair<treegls::VertexId, treegls::VertexId>> edges;
  std::vector<int> frontier = {0};
  int next_id = 1;
  for (int l = 0; l < depth; ++l) {
    std::vector<int> next_frontier;
    for (int p : frontier) {
      const int fanout = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_fanout)));
      for (int c = 0; c < fanout; ++c) {
        edges.emplace_back(next_id, p);
        next_frontier.push_back(next_id);
        ++next_id;
      }
    }
    frontier = std::move(next_frontier);
  }
  return treegls::build_tree(edges, 0);
}

inline Matrix random_spd(treegls::CounterRng& rng, int m) {
  Matrix r(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r(i, j) = rng.next_normal();
  Matrix a = r.transpose() * r;
  a.diagonal().array() += 0.5;
  return treegls::symmetrized(a);
}

// Full-rank m x n design (m >= n): random entries with a dominant diagonal
// added to the top n x n block.
inline Matrix random_design(treegls::CounterRng& rng, int m, int n) {
  Matrix s(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = rng.next_normal();
  for (int j = 0; j < n; ++j) s(j, j) += 4.0;
  return s;
}

// Random per-vertex measurements for a whole tree: m(g) in [n, n+3], either
// diagonal noise (entries in [0.5, 2.5]) or a dense SPD noise matrix.
inline std::vector<VertexMeasurements> random_measurements(treegls::CounterRng& rng,
                                                           const Tree& tree, int n,
                                                           bool dense_noise) {
  std::vector<VertexMeasurements> meas(tree.vertex_count());
  for (int v = 0; v < tree.vertex_count(); ++v) {
    const int m = n + static_cast<int>(rng.next_below(4));
    VertexMeasurements& vm = meas[v];
    vm.S = random_design(rng, m, n);
    vm.y.resize(m);
    for (int i = 0; i < m; ++i) vm.y(i) = 10.0 * rng.next_normal();
    if (dense_noise) {
      vm.diagonal_noise = false;
      vm.noise_full = random_spd(rng, m);
    } else {
      vm.diagonal_noise = true;
      vm.noise_diag.resize(m);
      for (int i = 0; i < m; ++i) vm.noise_diag(i) = 0.5 + 2.0 * rng.next_uniform();
    }
  }
  return meas;
}

inline std::unordered_map<int, int> leaf_index_map(const std::vector<int>& leaf_order) {
  std::unordered_map<int, int> idx;
  for (std::size_t i = 0; i < leaf_order.size(); ++i) idx[leaf_order[i]] = static_cast<int>(i);
  return idx;
}

// Marginal estimate for vertex v implied by the dense leaf-level solution:
// the sum of the leaf estimates over Leaves(v), with matching variance.
inline std::pair<Vector, Matrix> oracle_marginal(const Vector& beta, const Matrix& var,
                                                 const Tree& tree,
                                                 const std::vector<int>& leaf_order, int n,
                                                 int v) {
  const auto idx = leaf_index_map(leaf_order);
  const auto leaves = treegls::descendant_leaves(tree, v);
  Vector b = Vector::Zero(n);
  Matrix s = Matrix::Zero(n, n);
  for (int lu : leaves) {
    const int iu = idx.at(lu);
    b += beta.segment(iu * n, n);
    for (int lv : leaves) {
      const int iv = idx.at(lv);
      s += var.block(iu * n, iv * n, n, n);
    }
  }
  return {b, treegls::symmetrized(s)};
}

// Covariance between the vertex-u and vertex-v marginals implied by the dense
// solution: the sum of leaf-pair blocks over Leaves(u) x Leaves(v).
inline Matrix oracle_cov(const Matrix& var, const Tree& tree, const std::vector<int>& leaf_order,
                         int n, int u, int v) {
  const auto idx = leaf_index_map(leaf_order);
  Matrix s = Matrix::Zero(n, n);
  for (int lu : treegls::descendant_leaves(tree, u)) {
    const int iu = idx.at(lu);
    for (int lv : treegls::descendant_leaves(tree, v)) {
      const int iv = idx.at(lv);
      s += var.block(iu * n, iv * n, n, n);
    }
  }
  return s;
}

}  // namespace testsupport
