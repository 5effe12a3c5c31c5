#include "treegls/covariance.hpp"

#include <string>

#include "treegls/errors.hpp"
#include "treegls/spine.hpp"

namespace treegls {

namespace {

void require_known(const StateStore& store, VertexId v) {
  if (!store.tree.contains(v)) {
    throw UnknownVertex("vertex " + std::to_string(v) + " is not in the store's tree");
  }
}

bool is_ancestor_or_self(const Tree& t, VertexId anc, VertexId v) {
  while (t.level[v] > t.level[anc]) v = t.parent[v];
  return v == anc;
}

}  // namespace

Matrix path_A_product(const StateStore& store, const std::vector<VertexId>& path) {
  Matrix prod = Matrix::Identity(store.n, store.n);
  for (VertexId v : path) {
    require_known(store, v);
    prod = prod * store.states[v].A;
  }
  return prod;
}

Matrix compute_covariance(const StateStore& store, VertexId u, VertexId v) {
  require_known(store, u);
  require_known(store, v);
  const Tree& t = store.tree;

  if (u == v) return store.states[u].var_final;

  if (is_ancestor_or_self(t, v, u)) {
    // Climb from u to v; every A on the way except v's own enters the product.
    std::vector<VertexId> path = shortest_path(t, u, v);
    path.pop_back();
    return path_A_product(store, path) * store.states[v].var_final;
  }
  if (is_ancestor_or_self(t, u, v)) {
    return compute_covariance(store, v, u).transpose();
  }

  const VertexId w = closest_common_ancestor(t, u, v);
  std::vector<VertexId> up_path = shortest_path(t, u, w);    // [u, ..., u', w]
  std::vector<VertexId> down_path = shortest_path(t, v, w);  // [v, ..., v', w]
  const VertexId u_side = up_path[up_path.size() - 2];
  const VertexId v_side = down_path[down_path.size() - 2];
  up_path.resize(up_path.size() - 2);
  down_path.resize(down_path.size() - 2);

  const Matrix& a_u = store.states[u_side].A;
  const Matrix& a_v = store.states[v_side].A;
  const Matrix core = a_u * store.states[w].var_final * a_v.transpose() -
                      a_u * store.states[v_side].var_up;
  return path_A_product(store, up_path) * core * path_A_product(store, down_path).transpose();
}

}  // namespace treegls
