// Benchmark of the OpenMP kernel paths against the serial references, plus
// the Monte Carlo ELBO sample loop with parallel tapes on and off.

#include <chrono>
#include <cstdio>

#include "dwp/inference.hpp"
#include "dwp/matrix.hpp"
#include "dwp/model.hpp"
#include "dwp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace dwp;
using Clock = std::chrono::steady_clock;

namespace {

Matrix random_matrix(int r, int c, RngStream& rng) {
  Matrix m(r, c);
  for (auto& x : m.vec()) x = rng.normal();
  return m;
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled at build time\n\n");
#endif

  RngStream rng(1);
  std::printf("%-22s %12s %12s %9s\n", "matmul", "serial (ms)", "openmp (ms)", "speedup");
  for (int n : {64, 128, 256, 384, 512}) {
    Matrix a = random_matrix(n, n, rng);
    Matrix b = random_matrix(n, n, rng);
    volatile double sink = 0.0;
    const double ts = time_best_of(5, [&] { sink = reference::matmul(a, b)(0, 0); });
    const double tp = time_best_of(5, [&] { sink = matmul(a, b)(0, 0); });
    (void)sink;
    std::printf("%-22d %12.3f %12.3f %8.2fx\n", n, ts * 1e3, tp * 1e3, ts / tp);
  }

  std::printf("\n%-22s %12s %12s %9s\n", "elbo (S samples)", "serial (ms)", "openmp (ms)",
              "speedup");
  RngStream data_rng(2);
  Matrix x = random_matrix(160, 6, data_rng);
  Matrix y = random_matrix(160, 1, data_rng);
  model::ModelConfig cfg;
  cfg.depth = 2;
  cfg.widths = {6, 6};
  cfg.inducing = 32;
  cfg.batch = 128;
  RngStream init_rng(3);
  model::DwpModel m = model::DwpModel::init(cfg, x, init_rng);

  Matrix xb(128, 6), yb(128, 1);
  for (int i = 0; i < 128; ++i) {
    for (int j = 0; j < 6; ++j) xb(i, j) = x(i, j);
    yb(i, 0) = y(i, 0);
  }
  for (int s : {4, 8, 16}) {
    infer::ElboOptions serial_opts, parallel_opts;
    serial_opts.parallel = false;
    parallel_opts.parallel = true;
    RngStream r1(9), r2(9);
    const double ts =
        time_best_of(3, [&] { infer::elbo_batch(m, xb, yb, 160, s, r1, serial_opts); });
    const double tp =
        time_best_of(3, [&] { infer::elbo_batch(m, xb, yb, 160, s, r2, parallel_opts); });
    std::printf("S=%-20d %12.1f %12.1f %8.2fx\n", s, ts * 1e3, tp * 1e3, ts / tp);
  }
  return 0;
}
