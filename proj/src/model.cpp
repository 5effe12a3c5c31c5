#include "treegls/model.hpp"

#include <string>

#include "treegls/errors.hpp"

namespace treegls {

namespace {

void validate_shapes(const VertexMeasurements& meas) {
  const int m = meas.m();
  const int n = meas.n();
  if (meas.y.size() != m) {
    throw DimensionMismatch("y has length " + std::to_string(meas.y.size()) + ", S has " +
                            std::to_string(m) + " rows");
  }
  if (n < 1) throw DimensionMismatch("S must have at least one column");
  if (m < n) {
    throw RankDeficientDesign("S is " + std::to_string(m) + "x" + std::to_string(n) +
                              "; full column rank needs m >= n");
  }
  if (meas.diagonal_noise) {
    if (meas.noise_diag.size() != m) {
      throw DimensionMismatch("diagonal noise has length " + std::to_string(meas.noise_diag.size()) +
                              ", expected " + std::to_string(m));
    }
    for (int i = 0; i < m; ++i) {
      if (!(meas.noise_diag(i) > 0.0)) {
        throw NonSPDNoise("noise variance " + describe(meas.noise_diag(i)) + " at row " +
                          std::to_string(i) + " is not strictly positive");
      }
    }
  } else if (meas.noise_full.rows() != m || meas.noise_full.cols() != m) {
    throw DimensionMismatch("full noise matrix is " + std::to_string(meas.noise_full.rows()) + "x" +
                            std::to_string(meas.noise_full.cols()) + ", expected " +
                            std::to_string(m) + "x" + std::to_string(m));
  }
}

}  // namespace

LocalEstimate local_gls(const VertexMeasurements& meas) {
  validate_shapes(meas);
  const int n = meas.n();

  Matrix gram(n, n);
  Vector rhs(n);
  if (meas.diagonal_noise) {
    // Row-wise accumulation: gram = sum_i S_i S_i^T / v_i, rhs = sum_i S_i y_i / v_i.
    gram.setZero();
    rhs.setZero();
    for (int i = 0; i < meas.m(); ++i) {
      const double w = 1.0 / meas.noise_diag(i);
      gram.noalias() += w * meas.S.row(i).transpose() * meas.S.row(i);
      rhs.noalias() += (w * meas.y(i)) * meas.S.row(i).transpose();
    }
  } else {
    Matrix vinv_s;
    Vector vinv_y;
    try {
      CholeskyFactor v(meas.noise_full, "noise matrix");
      vinv_s = v.solve(meas.S);
      vinv_y = v.solve(meas.y);
    } catch (const NonSPD& e) {
      throw NonSPDNoise(e.what());
    }
    gram = meas.S.transpose() * vinv_s;
    rhs = meas.S.transpose() * vinv_y;
  }

  LocalEstimate est;
  try {
    CholeskyFactor g(symmetrized(gram), "Gram matrix S^T V^-1 S");
    est.beta = g.solve(rhs);
    est.var = g.inverse();
  } catch (const NonSPD& e) {
    throw RankDeficientDesign(std::string("design matrix rank check failed: ") + e.what());
  }
  return est;
}

VertexMeasurements add_soft_constraints(const VertexMeasurements& meas, const Matrix& C,
                                        const Vector& c, double eps_var) {
  if (!(eps_var > 0.0)) {
    throw OutOfDomain("constraint variance must be positive, got " + describe(eps_var));
  }
  const int k = static_cast<int>(C.rows());
  if (C.cols() != meas.n() && k > 0) {
    throw DimensionMismatch("constraint matrix has " + std::to_string(C.cols()) +
                            " columns, design has " + std::to_string(meas.n()));
  }
  if (c.size() != k) {
    throw DimensionMismatch("constraint rhs has length " + std::to_string(c.size()) +
                            ", constraint matrix has " + std::to_string(k) + " rows");
  }
  if (k == 0) return meas;

  const int m = meas.m();
  VertexMeasurements out;
  out.S.resize(m + k, meas.n());
  out.S << meas.S, C;
  out.y.resize(m + k);
  out.y << meas.y, c;
  out.diagonal_noise = meas.diagonal_noise;
  if (meas.diagonal_noise) {
    out.noise_diag.resize(m + k);
    out.noise_diag << meas.noise_diag, Vector::Constant(k, eps_var);
  } else {
    out.noise_full = Matrix::Zero(m + k, m + k);
    out.noise_full.topLeftCorner(m, m) = meas.noise_full;
    out.noise_full.bottomRightCorner(k, k) = eps_var * Matrix::Identity(k, k);
  }
  return out;
}

}  // namespace treegls
