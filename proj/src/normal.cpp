#include "treegls/normal.hpp"

#include <cmath>
#include <string>

#include "treegls/errors.hpp"

namespace treegls {

namespace {

// erfc via the classic three-regime rational approximations (Cody's CALERF
// coefficient set); relative error around 1e-16 on the positive axis.
double erfc_positive(double y) {
  constexpr double kInvSqrtPi = 5.6418958354775628695e-1;
  if (y <= 0.46875) {
    const double a[5] = {3.16112374387056560e00, 1.13864154151050156e02, 3.77485237685302021e02,
                         3.20937758913846947e03, 1.85777706184603153e-1};
    const double b[4] = {2.36012909523441209e01, 2.44024637934444173e02, 1.28261652607737228e03,
                         2.84423683343917062e03};
    const double z = y * y;
    double num = a[4] * z;
    double den = z;
    for (int i = 0; i < 3; ++i) {
      num = (num + a[i]) * z;
      den = (den + b[i]) * z;
    }
    return 1.0 - y * (num + a[3]) / (den + b[3]);
  }

  double result;
  if (y <= 4.0) {
    const double c[9] = {5.64188496988670089e-1, 8.88314979438837594e00, 6.61191906371416295e01,
                         2.98635138197400131e02, 8.81952221241769090e02, 1.71204761263407058e03,
                         2.05107837782607147e03, 1.23033935479799725e03, 2.15311535474403846e-8};
    const double d[8] = {1.57449261107098347e01, 1.17693950891312499e02, 5.37181101862009858e02,
                         1.62138957456669019e03, 3.29079923573345963e03, 4.36261909014324716e03,
                         3.43936767414372164e03, 1.23033935480374942e03};
    double num = c[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
      num = (num + c[i]) * y;
      den = (den + d[i]) * y;
    }
    result = (num + c[7]) / (den + d[7]);
  } else {
    const double p[6] = {3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
                         1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2};
    const double q[5] = {2.56852019228982242e00, 1.87295284992346047e00, 5.27905102951428412e-1,
                         6.05183413124413191e-2, 2.33520497626869185e-3};
    const double z = 1.0 / (y * y);
    double num = p[5] * z;
    double den = z;
    for (int i = 0; i < 4; ++i) {
      num = (num + p[i]) * z;
      den = (den + q[i]) * z;
    }
    result = z * (num + p[4]) / (den + q[4]);
    result = (kInvSqrtPi - result) / y;
  }
  // exp(-y^2) split to dodge cancellation in the argument.
  const double ysq = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ysq) * (y + ysq);
  return std::exp(-ysq * ysq) * std::exp(-del) * result;
}

double erfc_impl(double x) { return x < 0.0 ? 2.0 - erfc_positive(-x) : erfc_positive(x); }

}  // namespace

double normal_cdf(double x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  return 0.5 * erfc_impl(-x * kInvSqrt2);
}

namespace {

// Quantile for p in (0, 0.5]; the caller reflects the upper half. Working on
// the lower half only keeps the refinement step accurate: near 0 the CDF has
// full relative precision, whereas near 1 it carries absolute rounding of
// order 1e-16 which, divided by a tail density, would swamp the correction.
double quantile_lower_half(double p) {
  // Rational initial guess (Acklam's coefficients), |relative error| < 1.2e-9.
  const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                       1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                       6.680131188771972e+01, -1.328068155288572e+01};
  const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                       -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                       3.754408661907416e+00};
  constexpr double kLow = 0.02425;

  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  // One Halley step against the high-accuracy CDF.
  constexpr double kSqrt2Pi = 2.50662827463100050242;
  const double e = normal_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw OutOfDomain("normal_quantile needs p in (0,1), got " + describe(p));
  }
  // 1 - p is exact for p >= 0.5 (both operands within a factor of two).
  return p > 0.5 ? -quantile_lower_half(1.0 - p) : quantile_lower_half(p);
}

}  // namespace treegls
