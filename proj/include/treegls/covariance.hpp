#pragma once

// Exact Cov(final(u), final(v)) for any vertex pair, recovered from the
// per-vertex state without materializing the full covariance matrix.
// Read-only over the store; safe to call concurrently.

#include <vector>

#include "treegls/twopass.hpp"

namespace treegls {

// Product A(path[0]) A(path[1]) ... A(path.back()), deepest vertex leftmost.
// Callers pass a root-ward path with its last element already removed; the
// empty list is the identity.
Matrix path_A_product(const StateStore& store, const std::vector<VertexId>& path);

// Cases:
//   u == v            -> var_final(u)
//   v ancestor of u   -> (prod of A along u..v, v excluded) var_final(v)
//   u ancestor of v   -> transpose of the swapped call
//   otherwise         -> with w = cca(u,v), u' / v' the children of w on each
//                        side: A(u') var_final(w) A(v')^T - A(u') var_up(v'),
//                        pre/post-multiplied by the remaining path products
//                        (the v-side product applied transposed).
Matrix compute_covariance(const StateStore& store, VertexId u, VertexId v);

}  // namespace treegls
