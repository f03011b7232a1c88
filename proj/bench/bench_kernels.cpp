// Wall-clock comparison of the serial reference kernels against their
// OpenMP counterparts. Build and run by hand:
//
//   cmake --build build --target dsic_bench && ./build/bench/dsic_bench
//
// Speedups track the core count; on a single-core box both columns match.

#include <cstdio>
#include <functional>

#include <omp.h>

#include "dsic/basis.hpp"
#include "dsic/config.hpp"
#include "dsic/experiments.hpp"
#include "dsic/pilot_opt.hpp"
#include "dsic/signals.hpp"

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    fn();
    const double dt = omp_get_wtime() - t0;
    if (dt < best) best = dt;
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-24s serial %8.1f ms   parallel %8.1f ms   speedup %.2fx\n",
              name, serial_s * 1e3, parallel_s * 1e3,
              parallel_s > 0 ? serial_s / parallel_s : 0.0);
}

}  // namespace

int main() {
  using namespace dsic;
  std::printf("threads available: %d\n\n", omp_get_max_threads());

  // Regressor matrix construction.
  {
    BasisConfig bc;
    bc.order = 9;
    bc.memory = 8;
    bc.kind = BasisKind::GLP;
    const ComplexSequence x = gen_gaussian_sequence(4096 + 8, {7, streams::data, 0});
    const double ts = time_best_of(3, [&] {
      volatile double sink = build_measurement_matrix_serial(x, bc, SourceKind::data)
                                 .entries(0, 0)
                                 .real();
      (void)sink;
    });
    const double tp = time_best_of(3, [&] {
      volatile double sink =
          build_measurement_matrix(x, bc, SourceKind::data).entries(0, 0).real();
      (void)sink;
    });
    report("matrix build", ts, tp);
  }

  // Pilot selection over a candidate ensemble.
  {
    BasisConfig bc;
    bc.order = 7;
    bc.memory = 6;
    bc.kind = BasisKind::GLP;
    const StreamSeed seed{7, streams::ensemble, 0};
    const double ts = time_best_of(2, [&] {
      volatile int sink =
          select_pilot_serial(64, 512, PilotDistribution::gaussian, bc, seed)
              .ensemble_index;
      (void)sink;
    });
    const double tp = time_best_of(2, [&] {
      volatile int sink =
          select_pilot(64, 512, PilotDistribution::gaussian, bc, seed)
              .ensemble_index;
      (void)sink;
    });
    report("pilot selection", ts, tp);
  }

  // Full trial batch (trial loop is the parallel axis).
  {
    ExperimentConfig cfg =
        default_config(ExperimentKind::pilot_compare, Profile::desk);
    cfg.trials = 16;
    cfg.symbol_len = 128;
    cfg.memory = 4;
    cfg.data_symbols = 4;
    cfg.ensemble_size = 16;
    cfg.fixed_order = 7;
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const double ts = time_best_of(1, [&] { run_pilot_compare(cfg); });
    omp_set_num_threads(max_threads);
    const double tp = time_best_of(1, [&] { run_pilot_compare(cfg); });
    report("trial batch", ts, tp);
  }

  return 0;
}
