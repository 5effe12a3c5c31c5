#pragma once

// Small dense SPD kernels shared by the estimator path. All SPD solves on
// that path go through CholeskyFactor, a pivot-checked lower-triangular
// factorization; the brute-force oracle deliberately uses a different solver
// (Eigen LLT) so the two routes stay independent.

#include <Eigen/Dense>

namespace treegls {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// (M + M^T)/2. Applied to every computed variance so asymmetry cannot
// accumulate through deep recursions.
Matrix symmetrized(const Matrix& m);

// Lower-triangular Cholesky of an SPD matrix. A pivot below
// 1e-10 * (trace/n) fails the factorization: that threshold is the rank /
// SPD check used everywhere on the estimator path.
class CholeskyFactor {
 public:
  // Throws NonSPD when the matrix is not square or a pivot falls below the
  // threshold. `context` is prepended to the error message.
  explicit CholeskyFactor(const Matrix& a, const char* context = "matrix");

  int dim() const { return static_cast<int>(l_.rows()); }

  // Solve A x = b.
  Vector solve(const Vector& b) const;
  // Solve A X = B column by column.
  Matrix solve(const Matrix& b) const;
  // A^{-1}, symmetrized.
  Matrix inverse() const;

 private:
  Matrix l_;
};

// A^{-1} for SPD A via CholeskyFactor; symmetrized.
Matrix spd_inverse(const Matrix& a, const char* context = "matrix");

}  // namespace treegls
