// Compares the serial reference estimator against the OpenMP level-parallel
// kernel on a complete tree, and verifies their outputs are bit-identical.
//
//   bench_twopass [fanout] [depth] [n] [threads] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "treegls/hay.hpp"
#include "treegls/rng.hpp"
#include "treegls/twopass.hpp"

using namespace treegls;

namespace {

std::vector<VertexMeasurements> make_measurements(const Tree& tree, int n, std::uint64_t seed) {
  std::vector<VertexMeasurements> meas(tree.vertex_count());
  for (int v = 0; v < tree.vertex_count(); ++v) {
    CounterRng rng(seed, static_cast<std::uint64_t>(v), 0);
    VertexMeasurements& m = meas[v];
    m.S = Matrix::Identity(n, n);
    m.diagonal_noise = true;
    m.noise_diag = Vector::Constant(n, 1.0);
    m.y.resize(n);
    for (int i = 0; i < n; ++i) m.y(i) = 100.0 + rng.next_normal();
  }
  return meas;
}

bool identical(const StateStore& a, const StateStore& b) {
  for (int v = 0; v < a.tree.vertex_count(); ++v) {
    const VertexState& x = a.states[v];
    const VertexState& y = b.states[v];
    if (x.beta_final != y.beta_final || x.var_final != y.var_final || x.A != y.A ||
        x.beta_up != y.beta_up || x.var_up != y.var_up) {
      return false;
    }
  }
  return true;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int fanout = argc > 1 ? std::atoi(argv[1]) : 10;
  const int depth = argc > 2 ? std::atoi(argv[2]) : 4;
  const int n = argc > 3 ? std::atoi(argv[3]) : 4;
#ifdef _OPENMP
  const int threads = argc > 4 ? std::atoi(argv[4]) : omp_get_max_threads();
#else
  const int threads = 1;
#endif
  const int repeats = argc > 5 ? std::atoi(argv[5]) : 3;

  const Tree tree = uniform_tree(fanout, depth);
  const auto meas = make_measurements(tree, n, 7);
  std::printf("tree: fanout %d, depth %d -> %d vertices, %zu leaves, n=%d\n", fanout, depth,
              tree.vertex_count(), tree.leaves().size(), n);

  double best_serial = 1e300;
  StateStore serial;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    serial = run_two_pass_serial(tree, meas);
    best_serial = std::min(best_serial, seconds_since(start));
  }
  std::printf("serial reference : %.3f s (best of %d)\n", best_serial, repeats);

  double best_parallel = 1e300;
  StateStore parallel;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    parallel = run_two_pass(tree, meas, threads);
    best_parallel = std::min(best_parallel, seconds_since(start));
  }
  std::printf("openmp %2d threads: %.3f s (best of %d), speedup %.2fx\n", threads, best_parallel,
              repeats, best_serial / best_parallel);

  if (!identical(serial, parallel)) {
    std::printf("MISMATCH: parallel output differs from the serial reference\n");
    return 1;
  }
  std::printf("outputs bit-identical\n");
  return 0;
}
