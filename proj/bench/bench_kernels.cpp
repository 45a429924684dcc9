// Serial reference kernels against their OpenMP counterparts, plus one
// full split step on the default 1-D grid.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "nls/dynamics.hpp"
#include "nls/ground_state.hpp"
#include "nls/kernels.hpp"

namespace {

using nls::kernels::cplx;

std::vector<cplx> random_field(std::size_t n) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

template <void (*Phase)(std::span<cplx>, double, double)>
void BM_nonlinear_phase(benchmark::State& state) {
  auto u = random_field(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Phase(u, 1e-6, 6.0);
    benchmark::DoNotOptimize(u.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <double (*Sum)(std::span<const cplx>, double)>
void BM_sum_abs_pow(benchmark::State& state) {
  const auto u = random_field(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Sum(u, 8.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <void (*Prop)(std::span<cplx>, std::span<const double>, double)>
void BM_free_propagator(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<cplx> m(n);
  std::vector<double> k2(n);
  for (std::size_t i = 0; i < n; ++i) k2[i] = 1e-3 * static_cast<double>(i);
  for (auto _ : state) {
    Prop(m, k2, 1e-3);
    benchmark::DoNotOptimize(m.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_split_step(benchmark::State& state) {
  const auto params = nls::PhysParams::make(1, 7.0);
  const auto grid = nls::GridSpec::make(32.0, static_cast<int>(state.range(0)));
  const auto Q = nls::solve_1d_closed_form(params, grid);
  nls::SplitStepper stepper(params, grid);
  nls::Field u = Q.profile;
  for (auto _ : state) stepper.step(u, 1e-5);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

namespace ks = nls::kernels::serial;
namespace kp = nls::kernels::parallel;

BENCHMARK(BM_nonlinear_phase<ks::nonlinear_phase>)->Name("nonlinear_phase/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_nonlinear_phase<kp::nonlinear_phase>)->Name("nonlinear_phase/openmp")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_sum_abs_pow<ks::sum_abs_pow>)->Name("sum_abs_pow/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_sum_abs_pow<kp::sum_abs_pow>)->Name("sum_abs_pow/openmp")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_free_propagator<ks::free_propagator>)->Name("free_propagator/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_free_propagator<kp::free_propagator>)->Name("free_propagator/openmp")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_split_step)->Arg(1024)->Arg(32768);

}  // namespace

BENCHMARK_MAIN();
