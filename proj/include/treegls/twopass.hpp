#pragma once

// The two-pass estimator. Fine-to-coarse: fuse each vertex's local estimate
// with the sum of its children's fused estimates (inverse-variance weighting,
// levels L-1 down to 0). Coarse-to-fine: project the root estimate back down,
// distributing each parent's discrepancy among its children through the
// weight matrices A(c), so parent-child consistency holds exactly.
//
// Both passes are level-synchronous: within a level every vertex depends only
// on already-finished levels, so the level loop parallelizes with a barrier
// in between. run_two_pass is the OpenMP kernel; run_two_pass_serial is the
// plain-loop reference kept for testing and benchmarking. Their outputs are
// bit-identical (per-vertex arithmetic is sequential and child sums always
// run in ascending id order).

#include <utility>
#include <vector>

#include "treegls/linalg.hpp"
#include "treegls/model.hpp"
#include "treegls/spine.hpp"

namespace treegls {

// Everything the two passes produce for one vertex.
struct VertexState {
  Vector beta_local;  // local GLS estimate from this vertex's own rows
  Matrix var_local;
  Vector beta_up;     // after fine-to-coarse fusion with the subtree below
  Matrix var_up;
  Matrix A;           // child weight matrix; identity at the root
  Vector beta_final;  // full-information estimate
  Matrix var_final;
};

struct StateStore {
  Tree tree;
  int n = 0;
  std::vector<VertexState> states;  // indexed by vertex id
};

// Minimum-variance fusion of two independent unbiased estimates:
//   V = (Va^-1 + Vb^-1)^-1,  mean = V (Va^-1 a + Vb^-1 b).
std::pair<Vector, Matrix> ivw_mean(const Vector& a, const Matrix& va, const Vector& b,
                                   const Matrix& vb);

struct UpEstimate {
  Vector beta_up;
  Matrix var_up;
};

struct DownEstimate {
  Matrix A;
  Vector beta_final;
  Matrix var_final;
};

// Upward pass. Leaves pass their local estimate through; every parent fuses
// its local estimate with the summed child estimates. threads <= 1 runs the
// serial reference loop.
std::vector<UpEstimate> fine_to_coarse(const Tree& tree, const std::vector<LocalEstimate>& local,
                                       int threads = 1);

// Downward pass. Root: final = up, A = I. Child c of g:
//   A(c)    = var_up(c) (sum_{c'} var_up(c'))^-1
//   beta(c) = beta_up(c) + A(c) (beta_final(g) - sum_{c'} beta_up(c'))
//   var(c)  = var_up(c) - A(c) var_up(c) + A(c) var_final(g) A(c)^T
// The per-parent sum is factorized once and reused for all children.
std::vector<DownEstimate> coarse_to_fine(const Tree& tree, const std::vector<UpEstimate>& up,
                                         int threads = 1);

// local_gls at every vertex, then both passes. threads = 0 means all
// available cores; the result is identical for every thread count.
StateStore run_two_pass(const Tree& tree, const std::vector<VertexMeasurements>& meas,
                        int threads = 0);

// Plain sequential composition of the same per-vertex arithmetic; no OpenMP.
StateStore run_two_pass_serial(const Tree& tree, const std::vector<VertexMeasurements>& meas);

}  // namespace treegls
