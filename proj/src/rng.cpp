#include "treegls/rng.hpp"

#include <cmath>

namespace treegls {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// P(true) = exp(-gamma) for gamma in [0,1]: count Bernoulli(gamma/k) successes
// until the first failure at K; exp(-gamma)'s alternating series makes the
// parity of K the right coin.
bool bernoulli_exp_unit(double gamma, CounterRng& rng) {
  int k = 1;
  while (rng.next_bernoulli(gamma / k)) ++k;
  return k % 2 == 1;
}

// P(true) = exp(-gamma) for any gamma >= 0, as a product of unit factors.
bool bernoulli_exp(double gamma, CounterRng& rng) {
  while (gamma > 1.0) {
    if (!bernoulli_exp_unit(1.0, rng)) return false;
    gamma -= 1.0;
  }
  return bernoulli_exp_unit(gamma, rng);
}

// Two-sided geometric with pmf proportional to exp(-|x|/t), integer t >= 1.
long long discrete_laplace(long long t, CounterRng& rng) {
  for (;;) {
    const auto u = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(t)));
    if (!bernoulli_exp(static_cast<double>(u) / static_cast<double>(t), rng)) continue;
    long long v = 0;
    while (bernoulli_exp(1.0, rng)) ++v;
    const long long magnitude = u + t * v;
    const bool negative = rng.next_bernoulli(0.5);
    if (negative && magnitude == 0) continue;  // keep a single zero outcome
    return negative ? -magnitude : magnitude;
  }
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t hi, std::uint64_t lo) {
  state_ = mix64(seed + kGolden);
  state_ = mix64(state_ ^ (hi + kGolden));
  state_ = mix64(state_ ^ (lo + kGolden));
}

std::uint64_t CounterRng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double CounterRng::next_uniform() {
  // 53 high bits, centered on half-steps: strictly inside (0,1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

bool CounterRng::next_bernoulli(double p) { return next_uniform() < p; }

std::uint64_t CounterRng::next_below(std::uint64_t bound) {
  const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

long long sample_discrete_gaussian(double sigma2, CounterRng& rng) {
  const double sigma = std::sqrt(sigma2);
  const long long t = static_cast<long long>(std::floor(sigma)) + 1;
  for (;;) {
    const long long y = discrete_laplace(t, rng);
    const double dev = std::abs(static_cast<double>(y)) - sigma2 / static_cast<double>(t);
    if (bernoulli_exp(dev * dev / (2.0 * sigma2), rng)) return y;
  }
}

}  // namespace treegls
