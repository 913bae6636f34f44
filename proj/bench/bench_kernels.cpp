// Serial reference against the OpenMP and separable kernels.

#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mvpf/interaction.hpp"
#include "mvpf/law.hpp"

using namespace mvpf;

namespace {

ParticleCloud random_cloud(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = g(gen);
  return ParticleCloud::from_scalars(xs);
}

// sin(x - y) without its expansion, so every backend takes the direct sum.
const Kernel& plain_sine() {
  static const Kernel k = Kernel::general(
      [](std::span<const double> x, std::span<const double> y) { return std::sin(x[0] - y[0]); });
  return k;
}

void mean_field(benchmark::State& state, Backend backend, bool separable) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cloud = random_cloud(n, 1);
  static const Kernel expanded = Kernel::sine_difference();
  const Kernel& k = separable ? expanded : plain_sine();
  std::vector<double> out(n);
  for (auto _ : state) {
    batch_mean_field(k, cloud, cloud, out, backend);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * static_cast<long>(n));
}

void law(benchmark::State& state, Backend backend) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto model = kuramoto(0.0, 0.2, 1.0);
  const auto start = random_cloud(m, 2);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream s(1, StreamId{rep++, Role::law, 3, 0});
    auto lat = propagate_law(model, LevelGrid(3), m, start, s, backend);
    benchmark::DoNotOptimize(lat);
  }
}

}  // namespace

BENCHMARK_CAPTURE(mean_field, reference, Backend::reference, false)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK_CAPTURE(mean_field, openmp, Backend::openmp, false)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK_CAPTURE(mean_field, separable, Backend::automatic, true)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK_CAPTURE(law, reference, Backend::reference)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK_CAPTURE(law, openmp, Backend::openmp)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK_CAPTURE(law, automatic, Backend::automatic)->RangeMultiplier(4)->Range(64, 1024);

BENCHMARK_MAIN();
