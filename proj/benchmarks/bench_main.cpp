#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "quasibohm/ensemble.hpp"
#include "quasibohm/lyapunov.hpp"
#include "quasibohm/spectrum.hpp"

namespace {

using namespace quasibohm;

const SuperpositionState& double_well() {
  static const SuperpositionState state = [] {
    const PiecewiseBox box{{0.0, 10.0}, {{0.0, 4.5, 0.0}, {4.5, 5.5, 5.0}, {5.5, 10.0, 0.0}}};
    std::vector<Complex> a;
    for (int k = 0; k < 5; ++k) a.push_back(std::polar(1.0 / std::sqrt(5.0), double(k)));
    return SuperpositionState(build_numeric(box, 4001, 5), a);
  }();
  return state;
}

void BM_BuildNumericBasis(benchmark::State& st) {
  const PiecewiseBox box{{0.0, 10.0}, {{0.0, 4.5, 0.0}, {4.5, 5.5, 5.0}, {5.5, 10.0, 0.0}}};
  for (auto _ : st) benchmark::DoNotOptimize(build_numeric(box, static_cast<std::size_t>(st.range(0)), 5));
}
BENCHMARK(BM_BuildNumericBasis)->Arg(1001)->Arg(4001)->Unit(benchmark::kMillisecond);

void BM_BasisEvaluate(benchmark::State& st) {
  const EigenBasis& b = double_well().basis();
  std::vector<double> phi(5), dphi(5);
  double x = 0.1;
  for (auto _ : st) {
    b.evaluate(x, phi, dphi);
    benchmark::DoNotOptimize(phi.data());
    x = x > 9.8 ? 0.1 : x + 0.0137;
  }
}
BENCHMARK(BM_BasisEvaluate);

void BM_Velocity(benchmark::State& st) {
  const SuperpositionState& s = double_well();
  double x = 0.5, t = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(s.at(t).flow(x));
    x = x > 9.0 ? 0.5 : x + 0.0137;
    t += 0.01;
  }
}
BENCHMARK(BM_Velocity);

void BM_CdfInverse(benchmark::State& st) {
  const SuperpositionState& s = double_well();
  double p = 0.01, t = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(s.cdf_inverse(p, t));
    p = p > 0.98 ? 0.01 : p + 0.0137;
    t += 0.1;
  }
}
BENCHMARK(BM_CdfInverse);

void BM_EvolveOde(benchmark::State& st) {
  const std::vector<double> grid = uniform_times(100.0, 0.1);
  for (auto _ : st) benchmark::DoNotOptimize(evolve_ode(double_well(), 2.5, grid));
}
BENCHMARK(BM_EvolveOde)->Unit(benchmark::kMillisecond);

void BM_EvolveCdf(benchmark::State& st) {
  const std::vector<double> grid = uniform_times(100.0, 0.1);
  for (auto _ : st) benchmark::DoNotOptimize(evolve_cdf(double_well(), 2.5, grid));
}
BENCHMARK(BM_EvolveCdf)->Unit(benchmark::kMillisecond);

void BM_Variational(benchmark::State& st) {
  const std::vector<double> grid = uniform_times(1000.0, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(lyapunov_variational(double_well(), 2.5, grid));
}
BENCHMARK(BM_Variational)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& st) {
  const std::vector<double> init = equilibrium_quantiles(double_well(), 1000);
  const std::vector<double> grid = uniform_times(100.0, 1.0);
  const auto threads = static_cast<unsigned>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(evolve_ensemble(double_well(), init, grid, Method::Cdf, threads));
}
BENCHMARK(BM_Ensemble)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_PowerSpectrum(benchmark::State& st) {
  std::vector<double> series(40000);
  for (std::size_t k = 0; k < series.size(); ++k) series[k] = std::cos(0.05 * k * 1.3) + 0.1 * std::cos(0.05 * k * 2.9);
  for (auto _ : st) benchmark::DoNotOptimize(power_spectrum(series, 0.05));
}
BENCHMARK(BM_PowerSpectrum)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
