#include "treegls/hay.hpp"

#include <string>

#include "treegls/errors.hpp"

namespace treegls {

namespace {

// k^e with an overflow guard; weights must stay exact in integer arithmetic.
long long ipow_checked(int k, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > (1LL << 62) / k) {
      throw OutOfDomain("k^" + std::to_string(e) + " exceeds the integer weight range");
    }
    r *= k;
  }
  return r;
}

void validate(const UniformScalarTree& t) {
  if (t.k < 2) throw NonCompleteTree("fanout must be at least 2, got " + std::to_string(t.k));
  if (t.L < 0) throw NonCompleteTree("depth must be nonnegative, got " + std::to_string(t.L));
  const long long expect = uniform_tree_vertex_count(t.k, t.L);
  if (static_cast<long long>(t.y.size()) != expect) {
    throw NonCompleteTree("complete " + std::to_string(t.k) + "-ary tree of depth " +
                          std::to_string(t.L) + " has " + std::to_string(expect) +
                          " vertices, got " + std::to_string(t.y.size()) + " observations");
  }
}

// First vertex id of level l in heap layout: (k^l - 1)/(k - 1).
long long level_start(int k, int l) { return (ipow_checked(k, l) - 1) / (k - 1); }

}  // namespace

long long uniform_tree_vertex_count(int k, int L) {
  return (ipow_checked(k, L + 1) - 1) / (k - 1);
}

Tree uniform_tree(int k, int L) {
  const long long count = uniform_tree_vertex_count(k, L);
  std::vector<std::pair<VertexId, VertexId>> pairs;
  pairs.reserve(static_cast<size_t>(count - 1));
  for (long long v = 1; v < count; ++v) {
    pairs.emplace_back(static_cast<VertexId>(v), static_cast<VertexId>((v - 1) / k));
  }
  return build_tree(pairs, 0);
}

std::vector<double> hay_z(const UniformScalarTree& t) {
  validate(t);
  std::vector<double> z = t.y;  // leaves pass through
  for (int l = t.L - 1; l >= 0; --l) {
    const long long begin = level_start(t.k, l);
    const long long end = level_start(t.k, l + 1);
    // Weights from exact integer powers: with h = L - l,
    //   own weight   (k^(h+1) - k^h) / (k^(h+1) - 1)
    //   child weight (k^h - 1)       / (k^(h+1) - 1)
    const long long kh = ipow_checked(t.k, t.L - l);
    const long long khp1 = ipow_checked(t.k, t.L - l + 1);
    const double own = static_cast<double>(khp1 - kh) / static_cast<double>(khp1 - 1);
    const double child = static_cast<double>(kh - 1) / static_cast<double>(khp1 - 1);
    for (long long v = begin; v < end; ++v) {
      double sum = 0.0;
      for (int i = 1; i <= t.k; ++i) sum += z[static_cast<size_t>(v * t.k + i)];
      z[static_cast<size_t>(v)] = own * t.y[static_cast<size_t>(v)] + child * sum;
    }
  }
  return z;
}

std::vector<double> hay_estimate(const UniformScalarTree& t) {
  const std::vector<double> z = hay_z(t);
  std::vector<double> est(z.size());
  est[0] = z[0];
  for (int l = 1; l <= t.L; ++l) {
    for (long long g = level_start(t.k, l - 1); g < level_start(t.k, l); ++g) {
      // The correction shares the parent's surplus over ALL its children's z
      // (siblings included), equally.
      double child_sum = 0.0;
      for (int i = 1; i <= t.k; ++i) child_sum += z[static_cast<size_t>(g * t.k + i)];
      const double share = (est[static_cast<size_t>(g)] - child_sum) / static_cast<double>(t.k);
      for (int i = 1; i <= t.k; ++i) {
        const long long v = g * t.k + i;
        est[static_cast<size_t>(v)] = z[static_cast<size_t>(v)] + share;
      }
    }
  }
  return est;
}

}  // namespace treegls
