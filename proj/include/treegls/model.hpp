#pragma once

// Per-vertex measurement model y = S beta + u and its local GLS solve, the
// initialization step of the two-pass estimator. Pure functions over value
// types; thread-safe.

#include "treegls/linalg.hpp"

namespace treegls {

// Observations at one vertex. Noise is either a diagonal (vector of
// variances, the common case, exploited for O(m n^2) Gram assembly) or a
// full m x m SPD matrix.
struct VertexMeasurements {
  Matrix S;           // m x n, full column rank
  Vector y;           // length m
  bool diagonal_noise = true;
  Vector noise_diag;  // length m when diagonal_noise
  Matrix noise_full;  // m x m otherwise

  int m() const { return static_cast<int>(S.rows()); }
  int n() const { return static_cast<int>(S.cols()); }
};

struct LocalEstimate {
  Vector beta;  // length n
  Matrix var;   // n x n SPD, symmetrized
};

// GLS on one vertex's own measurements:
//   beta = (S^T V^-1 S)^-1 S^T V^-1 y,  var = (S^T V^-1 S)^-1.
// Throws NonSPDNoise for unusable noise, RankDeficientDesign when the Gram
// matrix fails the Cholesky pivot check (S not full column rank).
LocalEstimate local_gls(const VertexMeasurements& meas);

// Appends soft equality constraints C beta ~= c as pseudo-observations with
// variance eps_var per row. Full-matrix noise is promoted to block-diagonal
// with eps_var * I in the new corner.
VertexMeasurements add_soft_constraints(const VertexMeasurements& meas, const Matrix& C,
                                        const Vector& c, double eps_var);

// Default pseudo-observation variance for soft constraints. Small enough to
// hold constraints tightly, large enough to keep the noise matrix well
// conditioned; exposed as a parameter, not hard-coded into the augmentation.
inline constexpr double kDefaultConstraintVariance = 1.0 / 16384.0;

}  // namespace treegls
