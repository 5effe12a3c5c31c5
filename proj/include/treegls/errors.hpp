#pragma once

// Error taxonomy. Three categories map onto the CLI exit codes:
// validation (1), numerical (2), I/O (3). Library code throws the
// specific leaf types; callers can catch by category.

#include <cstdio>
#include <stdexcept>
#include <string>

namespace treegls {

// Compact scalar formatting for error text; std::to_string's fixed six
// decimals would render small magnitudes (pivots, variances, tail
// probabilities) as 0.000000.
inline std::string describe(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  virtual int exit_code() const { return 1; }
};

struct ValidationError : Error {
  using Error::Error;
  int exit_code() const override { return 1; }
};

struct NumericalError : Error {
  using Error::Error;
  int exit_code() const override { return 2; }
};

struct IoError : Error {
  using Error::Error;
  int exit_code() const override { return 3; }
};

// Tree construction / lookup.
struct DuplicateVertex final : ValidationError { using ValidationError::ValidationError; };
struct MultipleRoots final : ValidationError { using ValidationError::ValidationError; };
struct OrphanVertex final : ValidationError { using ValidationError::ValidationError; };
struct CycleDetected final : ValidationError { using ValidationError::ValidationError; };
struct NonUniformLeafDepth final : ValidationError { using ValidationError::ValidationError; };
struct UnknownVertex final : ValidationError { using ValidationError::ValidationError; };

// Shapes and domains.
struct DimensionMismatch final : ValidationError { using ValidationError::ValidationError; };
struct OutOfDomain final : ValidationError { using ValidationError::ValidationError; };
struct NotALeaf final : ValidationError { using ValidationError::ValidationError; };
struct EmptyRegion final : ValidationError { using ValidationError::ValidationError; };
struct EmptyInput final : ValidationError { using ValidationError::ValidationError; };
struct NonCompleteTree final : ValidationError { using ValidationError::ValidationError; };
struct InfeasibleDenseSize final : ValidationError { using ValidationError::ValidationError; };

// Numerics.
struct NonSPD final : NumericalError { using NumericalError::NumericalError; };
struct NonSPDNoise final : NumericalError { using NumericalError::NumericalError; };
struct RankDeficientDesign final : NumericalError { using NumericalError::NumericalError; };
struct RankDeficient final : NumericalError { using NumericalError::NumericalError; };
struct ZeroVariance final : NumericalError { using NumericalError::NumericalError; };
struct NegativeVariance final : NumericalError { using NumericalError::NumericalError; };

}  // namespace treegls
