// Times the OpenMP kernels against the serial reference kernels and checks
// that both produce the same numbers.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "linwalk/model.hpp"
#include "linwalk/parallel.hpp"
#include "linwalk/statistic.hpp"

namespace {

template <typename F>
double time_ms(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  using namespace linwalk;
  apply_thread_limit_from_env();
  std::printf("threads: %d\n", thread_limit());

  ModelSpec spec;
  spec.thetas = {35.0 / 180.0 * std::numbers::pi, -45.0 / 180.0 * std::numbers::pi};
  spec.step_lengths = {1.0, 0.8};
  spec.change_points = {2500};
  spec.sigma2 = 1.0;
  spec.horizon = 5000;
  SeededRng rng(11, 0);
  const Track track = simulate(spec, rng);

  for (const int h : {30, 100, 300}) {
    DifferenceProcess par, ser;
    const double t_par = time_ms([&] { par = g_process_lw(track, h); }, 5);
    const double t_ser = time_ms([&] { ser = reference::g_process_lw_serial(track, h); }, 5);
    double diff = 0.0;
    for (std::size_t k = 0; k < par.values.size(); ++k) diff = std::max(diff, (par.values[k] - ser.values[k]).norm());
    std::printf("g_process_lw T=%lld h=%3d  parallel %8.2f ms  serial %8.2f ms  max|diff| %.3g\n",
                static_cast<long long>(spec.horizon), h, t_par, t_ser, diff);
  }

  for (const int sims : {500, 2000}) {
    const NullSimConfig config{400, {30, 50, 100}, sims, 0.05, 3};
    ThresholdResult par, ser;
    const double t_par = time_ms([&] { par = threshold(config, ModelKind::lw); }, 1);
    const double t_ser = time_ms([&] { ser = reference::threshold_serial(config, ModelKind::lw); }, 1);
    std::printf("threshold T=400 H={30,50,100} S=%4d  parallel %8.2f ms  serial(direct) %8.2f ms  Q %.6f vs %.6f\n",
                sims, t_par, t_ser, par.q, ser.q);
  }
  return 0;
}
