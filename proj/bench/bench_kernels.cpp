// Times the OpenMP kernels against the serial reference on a 150 x 150 grid by default.
//
//   bench_kernels [n_azimuth n_range repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "mlcs/kernels.hpp"
#include "mlcs/mlrda.hpp"
#include "mlcs/reference.hpp"
#include "mlcs/sim.hpp"

using namespace mlcs;

namespace {

ComplexGrid noise(Shape s, std::uint64_t seed) {
  const CounterRng rng(Seed{seed}, 0);
  ComplexGrid g(s);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto [a, b] = rng.normal_pair(j);
    g[j] = {a, b};
  }
  return g;
}

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial_ms, double omp_ms) {
  std::printf("%-22s %12.3f %12.3f %9.2fx\n", name, serial_ms, omp_ms, serial_ms / omp_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_az = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 150;
  const std::size_t n_rg = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 150;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 5;
  const Shape s{n_az, n_rg};
  const RadarParams params;
  const auto filters = rda::build_filters(params, s);

  std::printf("grid %zu x %zu, %d OpenMP threads, best of %d\n", n_az, n_rg, omp_get_max_threads(), repeats);
  std::printf("%-22s %12s %12s %10s\n", "kernel", "serial ms", "openmp ms", "speedup");

  auto a = noise(s, 1);
  for (Axis axis : {Axis::azimuth, Axis::range}) {
    const double ts = best_of(repeats, [&] { reference::fft_axis(a.values(), s, axis, Direction::forward); });
    const double tp = best_of(repeats, [&] { kernels::fft_axis(a.values(), s, axis, Direction::forward); });
    row(axis == Axis::azimuth ? "fft azimuth" : "fft range", ts, tp);
  }

  const auto in = noise(s, 2);
  ComplexGrid out(s);
  row("shift rows", best_of(repeats, [&] { reference::shift_rows(in, out, filters.rcmc_stencils); }),
      best_of(repeats, [&] { kernels::shift_rows(in, out, filters.rcmc_stencils); }));
  row("shift rows transpose",
      best_of(repeats, [&] { reference::shift_rows_transpose(in, out, filters.rcmc_stencils); }),
      best_of(repeats, [&] { kernels::shift_rows_transpose(in, out, filters.rcmc_stencils); }));

  auto g = noise(s, 3);
  row("multiply", best_of(repeats, [&] { reference::multiply(g, filters.azimuth_matched_filter, true); }),
      best_of(repeats, [&] { kernels::multiply(g, filters.azimuth_matched_filter, true); }));

  LookStack x(3, s);
  for (std::size_t i = 0; i < 3; ++i) x[i] = noise(s, 10 + i);
  row("pixel norms", best_of(repeats, [&] { reference::pixel_norms(x); }),
      best_of(repeats, [&] { kernels::pixel_norms(x); }));
  row("group threshold", best_of(repeats, [&] { auto y = x; reference::group_threshold(y, 1.0); }),
      best_of(repeats, [&] { auto y = x; kernels::group_threshold(y, 1.0); }));

  const auto lattice = sim::make_lattice(params, s);
  std::vector<EchoSource> sources;
  for (std::size_t j = 0; j < 20; ++j) {
    sources.push_back({lattice.eta((j * 37) % n_az),
                       params.slant_range_m() + (double((j * 53) % n_rg) - double(n_rg / 2)) * params.range_cell_m(),
                       1.0});
  }
  ComplexGrid echo(s);
  const int echo_repeats = std::max(1, repeats / 2);
  row("superpose echoes", best_of(echo_repeats, [&] { reference::superpose_echoes(params, lattice, sources, echo); }),
      best_of(echo_repeats, [&] { kernels::superpose_echoes(params, lattice, sources, echo); }));
  return 0;
}
