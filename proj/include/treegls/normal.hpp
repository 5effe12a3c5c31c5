#pragma once

// Standard normal CDF and quantile, implemented in-repo (rational
// approximations, no libm special functions) so interval endpoints are
// bit-stable across platforms.

namespace treegls {

// Phi(x). Absolute error below 1e-15 over the double range.
double normal_cdf(double x);

// Phi^-1(p) for 0 < p < 1, rational initial guess plus one Halley
// refinement; absolute error below 1e-9. Throws OutOfDomain outside (0,1).
double normal_quantile(double p);

}  // namespace treegls
