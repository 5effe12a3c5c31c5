#include "treegls/linalg.hpp"

#include <cmath>
#include <string>

#include "treegls/errors.hpp"

namespace treegls {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

CholeskyFactor::CholeskyFactor(const Matrix& a, const char* context) {
  const auto n = a.rows();
  if (a.cols() != n) {
    throw DimensionMismatch(std::string(context) + ": Cholesky needs a square matrix, got " +
                            std::to_string(n) + "x" + std::to_string(a.cols()));
  }
  // Relative pivot threshold: 1e-10 * mean diagonal magnitude.
  const double tol = 1e-10 * (a.trace() / static_cast<double>(n));
  l_ = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (!(d > tol)) {
      throw NonSPD(std::string(context) + ": pivot " + describe(d) + " at index " +
                   std::to_string(j) + " below threshold " + describe(tol));
    }
    const double dj = std::sqrt(d);
    l_(j, j) = dj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / dj;
    }
  }
}

Vector CholeskyFactor::solve(const Vector& b) const {
  const auto n = l_.rows();
  if (b.size() != n) {
    throw DimensionMismatch("Cholesky solve: vector length " + std::to_string(b.size()) +
                            " does not match dimension " + std::to_string(n));
  }
  Vector x = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = x(i);
    for (Eigen::Index k = 0; k < i; ++k) s -= l_(i, k) * x(k);
    x(i) = s / l_(i, i);
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = x(i);
    for (Eigen::Index k = i + 1; k < n; ++k) s -= l_(k, i) * x(k);
    x(i) = s / l_(i, i);
  }
  return x;
}

Matrix CholeskyFactor::solve(const Matrix& b) const {
  if (b.rows() != l_.rows()) {
    throw DimensionMismatch("Cholesky solve: row count " + std::to_string(b.rows()) +
                            " does not match dimension " + std::to_string(l_.rows()));
  }
  Matrix x(b.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) x.col(c) = solve(Vector(b.col(c)));
  return x;
}

Matrix CholeskyFactor::inverse() const {
  return symmetrized(solve(Matrix(Matrix::Identity(l_.rows(), l_.rows()))));
}

Matrix spd_inverse(const Matrix& a, const char* context) {
  return CholeskyFactor(a, context).inverse();
}

}  // namespace treegls
