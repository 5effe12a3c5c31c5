#pragma once

// Scalar baseline estimator on complete k-ary trees with one unit-variance
// observation per vertex: an upward weighted combination followed by a
// downward correction with equal 1/k shares. On its domain it produces the
// same estimates as the two-pass algorithm, which the tests verify.

#include <vector>

#include "treegls/spine.hpp"

namespace treegls {

// Complete k-ary tree in heap layout: root 0, children of v are
// v*k+1 .. v*k+k, observations indexed by vertex id, variance fixed at 1.
struct UniformScalarTree {
  int k = 2;
  int L = 1;
  std::vector<double> y;  // one scalar per vertex, heap order
};

// Vertex count (k^(L+1)-1)/(k-1); throws OutOfDomain when k^(L+1) would
// overflow the integer weight arithmetic.
long long uniform_tree_vertex_count(int k, int L);

// The tree above as a Tree, for running the general estimator on it.
Tree uniform_tree(int k, int L);

// Upward combination: leaves keep y; an internal vertex at level l blends its
// own observation with its children's sum using exact integer-power weights
//   z = (k^(L-l+1)-k^(L-l))/(k^(L-l+1)-1) * y
//     + (k^(L-l)-1)/(k^(L-l+1)-1) * sum of children z.
std::vector<double> hay_z(const UniformScalarTree& t);

// Downward correction: root keeps z; child v of g gets
//   z(v) + (1/k) * (estimate(g) - sum of z over ALL children of g).
std::vector<double> hay_estimate(const UniformScalarTree& t);

}  // namespace treegls
