#include "treegls/query.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "treegls/errors.hpp"

namespace treegls {

std::vector<VertexId> collapse_region(const Tree& tree, const std::vector<VertexId>& H) {
  std::vector<char> active(tree.vertex_count(), 0);
  for (VertexId v : H) {
    if (!tree.contains(v)) throw UnknownVertex("region vertex " + std::to_string(v) + " unknown");
    if (!tree.is_leaf(v)) {
      throw NotALeaf("region vertex " + std::to_string(v) + " is at level " +
                     std::to_string(tree.level[v]) + ", not a leaf");
    }
    active[v] = 1;
  }
  // Bottom-up: a parent whose children are all active replaces them. Each
  // sweep moves the frontier one level, so activations cascade upward.
  for (int l = tree.depth; l >= 1; --l) {
    for (int p : tree.levels[l - 1]) {
      const auto& kids = tree.children[p];
      if (kids.empty()) continue;
      if (std::all_of(kids.begin(), kids.end(), [&](int c) { return active[c]; })) {
        for (int c : kids) active[c] = 0;
        active[p] = 1;
      }
    }
  }
  std::vector<VertexId> out;
  for (int v = 0; v < tree.vertex_count(); ++v) {
    if (active[v]) out.push_back(v);
  }
  return out;
}

CIResult estimate_query(const StateStore& store, const RegionQuery& rq) {
  if (rq.H.empty()) throw EmptyRegion("query region H is empty");
  if (rq.q.size() != store.n) {
    throw DimensionMismatch("query vector has length " + std::to_string(rq.q.size()) +
                            ", store blocks are length " + std::to_string(store.n));
  }
  if (!(rq.alpha > 0.0) || !(rq.alpha < 1.0)) {
    throw OutOfDomain("alpha must lie in (0,1), got " + describe(rq.alpha));
  }

  const std::vector<VertexId> region = collapse_region(store.tree, rq.H);

  CIResult r;
  r.alpha = rq.alpha;
  for (VertexId u : region) r.estimate += rq.q.dot(store.states[u].beta_final);

  // Off-diagonal pairs enter twice with transposed blocks; for the scalar
  // form q^T C q that is just a factor of two.
  double variance = 0.0;
  for (size_t i = 0; i < region.size(); ++i) {
    variance += rq.q.dot(compute_covariance(store, region[i], region[i]) * rq.q);
    for (size_t j = i + 1; j < region.size(); ++j) {
      variance += 2.0 * rq.q.dot(compute_covariance(store, region[i], region[j]) * rq.q);
    }
  }
  if (variance < 0.0) {
    if (variance <= -1e-8) {
      throw NegativeVariance("query variance " + describe(variance) +
                             " is negative beyond rounding tolerance");
    }
    variance = 0.0;  // rounding noise
  }
  r.variance = variance;

  const double c = std::sqrt(variance) * normal_quantile(1.0 - rq.alpha / 2.0);
  r.lower = r.estimate - c;
  r.upper = r.estimate + c;
  if (rq.clamp_nonnegative) {
    // Endpoints only; the point estimate is reported as computed.
    r.lower = std::max(r.lower, 0.0);
    r.upper = std::max(r.upper, 0.0);
  }
  return r;
}

std::pair<Vector, Matrix> aggregate_region(const StateStore& store,
                                           const std::vector<VertexId>& H) {
  if (H.empty()) throw EmptyRegion("region H is empty");
  const Tree& tree = store.tree;

  // Per-record effective blocks. A record at vertex t stands for the sum of
  // the final estimates over a group of leaves below (or at) t:
  //   a_eff   = (sum over the group of the A-products from each member up to
  //              t, exclusive) * A(t)
  //   vup_eff = var_up(t) * (that same sum)^T
  // With these, the sibling covariance formula applied to records reproduces
  // the summed pairwise covariances of the groups, so merging records into
  // their parent keeps the variance of the total exact.
  struct Record {
    Vector beta;
    Matrix var;
    Matrix a_eff;
    Matrix vup_eff;
  };
  std::map<VertexId, Record> records;
  for (VertexId u : collapse_region(tree, H)) {
    const VertexState& s = store.states[u];
    records.emplace(u, Record{s.beta_final, s.var_final, s.A, s.var_up});
  }

  while (records.size() > 1) {
    int deepest = 0;
    for (const auto& [v, rec] : records) deepest = std::max(deepest, tree.level[v]);

    // Absorb every deepest-level record into its parent; grouping by parent
    // keeps sibling records together so their cross terms are added here.
    std::map<VertexId, std::vector<VertexId>> by_parent;
    for (const auto& [v, rec] : records) {
      if (tree.level[v] == deepest) by_parent[tree.parent[v]].push_back(v);
    }
    for (const auto& [p, members] : by_parent) {
      const Matrix& parent_var = store.states[p].var_final;
      Record merged;
      merged.beta = Vector::Zero(store.n);
      merged.var = Matrix::Zero(store.n, store.n);
      Matrix a_sum = Matrix::Zero(store.n, store.n);
      for (size_t i = 0; i < members.size(); ++i) {
        const Record& ri = records.at(members[i]);
        merged.beta += ri.beta;
        merged.var += ri.var;
        a_sum += ri.a_eff;
        for (size_t j = i + 1; j < members.size(); ++j) {
          const Record& rj = records.at(members[j]);
          const Matrix cross =
              ri.a_eff * parent_var * rj.a_eff.transpose() - ri.a_eff * rj.vup_eff;
          merged.var += cross + cross.transpose();
        }
      }
      merged.var = symmetrized(merged.var);
      merged.a_eff = a_sum * store.states[p].A;
      merged.vup_eff = store.states[p].var_up * a_sum.transpose();
      for (VertexId v : members) records.erase(v);
      records.emplace(p, std::move(merged));
    }
  }

  Record& final = records.begin()->second;
  return {std::move(final.beta), std::move(final.var)};
}

std::pair<Vector, Matrix> combine_runs(const Vector& b0, const Matrix& v0, const Vector& b1,
                                       const Matrix& v1) {
  return ivw_mean(b0, v0, b1, v1);
}

}  // namespace treegls
