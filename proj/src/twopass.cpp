#include "treegls/twopass.hpp"

#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "treegls/errors.hpp"

namespace treegls {

namespace {

std::string vertex_prefix(int v) { return "vertex " + std::to_string(v) + ": "; }

// Re-throws the library's error types with a vertex id prefixed to the
// message, preserving the concrete type.
template <typename F>
auto with_vertex_context(int v, F&& f) {
  try {
    return f();
  } catch (const NonSPDNoise& e) {
    throw NonSPDNoise(vertex_prefix(v) + e.what());
  } catch (const RankDeficientDesign& e) {
    throw RankDeficientDesign(vertex_prefix(v) + e.what());
  } catch (const NonSPD& e) {
    throw NonSPD(vertex_prefix(v) + e.what());
  } catch (const DimensionMismatch& e) {
    throw DimensionMismatch(vertex_prefix(v) + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(vertex_prefix(v) + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(vertex_prefix(v) + e.what());
  }
}

int resolve_threads(int threads) {
#ifdef _OPENMP
  if (threads <= 0) return omp_get_max_threads();
  return threads;
#else
  (void)threads;
  return 1;
#endif
}

// Runs body(v) for each vertex of one level. The parallel branch uses a
// static schedule so the partition depends only on the thread count, and
// exceptions are captured per index and re-thrown in ascending order, so
// results and errors are deterministic.
template <typename Fn>
void for_level(const std::vector<int>& verts, int threads, Fn&& body) {
  const int count = static_cast<int>(verts.size());
#ifdef _OPENMP
  if (threads > 1 && count > 1) {
    std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int i = 0; i < count; ++i) {
      try {
        body(verts[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return;
  }
#endif
  (void)threads;
  for (int i = 0; i < count; ++i) body(verts[i]);
}

UpEstimate fuse_with_children(const Tree& tree, int g, const LocalEstimate& local,
                              const std::vector<UpEstimate>& up) {
  // Children sums in ascending id order (children lists are sorted).
  const auto& kids = tree.children[g];
  Vector sum_beta = up[kids.front()].beta_up;
  Matrix sum_var = up[kids.front()].var_up;
  for (size_t i = 1; i < kids.size(); ++i) {
    sum_beta += up[kids[i]].beta_up;
    sum_var += up[kids[i]].var_up;
  }
  auto [beta, var] = ivw_mean(local.beta, local.var, sum_beta, sum_var);
  return {std::move(beta), std::move(var)};
}

// Projects parent g's final estimate onto all of its children. One
// factorization of the summed child variance serves every child.
void project_children(const Tree& tree, int g, const std::vector<UpEstimate>& up,
                      std::vector<DownEstimate>& down) {
  const auto& kids = tree.children[g];
  Matrix sum_var = up[kids.front()].var_up;
  Vector sum_beta = up[kids.front()].beta_up;
  for (size_t i = 1; i < kids.size(); ++i) {
    sum_var += up[kids[i]].var_up;
    sum_beta += up[kids[i]].beta_up;
  }
  const CholeskyFactor f(sum_var, "summed child variances");
  const Vector residual = down[g].beta_final - sum_beta;
  for (int c : kids) {
    // A(c) = var_up(c) F^-1; F and var_up are symmetric, so solve and
    // transpose.
    Matrix a = f.solve(up[c].var_up).transpose();
    down[c].beta_final = up[c].beta_up + a * residual;
    down[c].var_final = symmetrized(up[c].var_up - a * up[c].var_up +
                                    a * down[g].var_final * a.transpose());
    down[c].A = std::move(a);
  }
}

StateStore assemble(const Tree& tree, std::vector<LocalEstimate>&& local,
                    std::vector<UpEstimate>&& up, std::vector<DownEstimate>&& down) {
  StateStore store;
  store.tree = tree;
  store.n = static_cast<int>(local[tree.root].beta.size());
  store.states.resize(tree.vertex_count());
  for (int v = 0; v < tree.vertex_count(); ++v) {
    VertexState& s = store.states[v];
    s.beta_local = std::move(local[v].beta);
    s.var_local = std::move(local[v].var);
    s.beta_up = std::move(up[v].beta_up);
    s.var_up = std::move(up[v].var_up);
    s.A = std::move(down[v].A);
    s.beta_final = std::move(down[v].beta_final);
    s.var_final = std::move(down[v].var_final);
  }
  return store;
}

std::vector<LocalEstimate> all_local(const Tree& tree, const std::vector<VertexMeasurements>& meas,
                                     int threads) {
  if (static_cast<int>(meas.size()) != tree.vertex_count()) {
    throw DimensionMismatch("got measurements for " + std::to_string(meas.size()) + " of " +
                            std::to_string(tree.vertex_count()) + " vertices");
  }
  const int n = meas[tree.root].n();
  std::vector<LocalEstimate> local(tree.vertex_count());
  std::vector<int> all(tree.vertex_count());
  for (int v = 0; v < tree.vertex_count(); ++v) all[v] = v;
  for_level(all, threads, [&](int v) {
    with_vertex_context(v, [&] {
      if (meas[v].n() != n) {
        throw DimensionMismatch("block width " + std::to_string(meas[v].n()) +
                                " does not match the root's " + std::to_string(n));
      }
      local[v] = local_gls(meas[v]);
    });
  });
  return local;
}

}  // namespace

std::pair<Vector, Matrix> ivw_mean(const Vector& a, const Matrix& va, const Vector& b,
                                   const Matrix& vb) {
  const auto n = a.size();
  if (b.size() != n || va.rows() != n || va.cols() != n || vb.rows() != n || vb.cols() != n) {
    throw DimensionMismatch("ivw_mean: operand shapes disagree");
  }
  const Matrix va_inv = CholeskyFactor(va, "first variance").inverse();
  const Matrix vb_inv = CholeskyFactor(vb, "second variance").inverse();
  const Matrix v = CholeskyFactor(va_inv + vb_inv, "summed precision").inverse();
  Vector mean = v * (va_inv * a + vb_inv * b);
  return {std::move(mean), symmetrized(v)};
}

std::vector<UpEstimate> fine_to_coarse(const Tree& tree, const std::vector<LocalEstimate>& local,
                                       int threads) {
  if (static_cast<int>(local.size()) != tree.vertex_count()) {
    throw DimensionMismatch("fine_to_coarse: need a local estimate for every vertex");
  }
  threads = resolve_threads(threads);
  std::vector<UpEstimate> up(tree.vertex_count());
  for (int l = tree.depth; l >= 0; --l) {
    for_level(tree.levels[l], threads, [&](int v) {
      with_vertex_context(v, [&] {
        if (tree.is_leaf(v)) {
          up[v] = {local[v].beta, local[v].var};
        } else {
          up[v] = fuse_with_children(tree, v, local[v], up);
        }
      });
    });
  }
  return up;
}

std::vector<DownEstimate> coarse_to_fine(const Tree& tree, const std::vector<UpEstimate>& up,
                                         int threads) {
  if (static_cast<int>(up.size()) != tree.vertex_count()) {
    throw DimensionMismatch("coarse_to_fine: need an up-estimate for every vertex");
  }
  threads = resolve_threads(threads);
  std::vector<DownEstimate> down(tree.vertex_count());
  const int r = tree.root;
  const auto n = up[r].beta_up.size();
  down[r] = {Matrix::Identity(n, n), up[r].beta_up, up[r].var_up};
  for (int l = 0; l < tree.depth; ++l) {
    // Parents at level l write only their own children at level l+1.
    for_level(tree.levels[l], threads, [&](int g) {
      with_vertex_context(g, [&] { project_children(tree, g, up, down); });
    });
  }
  return down;
}

StateStore run_two_pass(const Tree& tree, const std::vector<VertexMeasurements>& meas,
                        int threads) {
  threads = resolve_threads(threads);
  auto local = all_local(tree, meas, threads);
  auto up = fine_to_coarse(tree, local, threads);
  auto down = coarse_to_fine(tree, up, threads);
  return assemble(tree, std::move(local), std::move(up), std::move(down));
}

StateStore run_two_pass_serial(const Tree& tree, const std::vector<VertexMeasurements>& meas) {
  auto local = all_local(tree, meas, 1);
  auto up = fine_to_coarse(tree, local, 1);
  auto down = coarse_to_fine(tree, up, 1);
  return assemble(tree, std::move(local), std::move(up), std::move(down));
}

}  // namespace treegls
