#pragma once

// Counter-based generator with per-(vertex, replicate) substreams: each draw
// is a hash of (seed-derived key, counter), so any substream can be opened
// independently and replicates parallelize without sharing state.

#include <cstdint>

namespace treegls {

class CounterRng {
 public:
  // Substream addressed by (seed, hi, lo); for simulation draws hi is the
  // vertex id and lo the replicate index.
  CounterRng(std::uint64_t seed, std::uint64_t hi, std::uint64_t lo);

  std::uint64_t next_u64();
  // Uniform on the open interval (0,1); never returns an endpoint.
  double next_uniform();
  // Standard normal via Box-Muller on two fresh uniforms.
  double next_normal();
  // Bernoulli(p).
  bool next_bernoulli(double p);
  // Uniform integer in [0, bound), bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Exact sampler for the integer-valued distribution with
// pmf(x) proportional to exp(-x^2 / (2 sigma2)): rejection from a two-sided
// geometric proposal, built from Bernoulli(exp(-gamma)) chains, so no
// floating-point tail truncation is involved.
long long sample_discrete_gaussian(double sigma2, CounterRng& rng);

}  // namespace treegls
