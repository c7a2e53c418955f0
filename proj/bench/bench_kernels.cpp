// Serial reference vs OpenMP kernels. Cap threads with OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "svgd/kernels.hpp"
#include "svgd/ksd.hpp"
#include "svgd/svgd.hpp"
#include "svgd/targets.hpp"

using namespace svgd;

namespace {

struct Problem {
  ParticleEnsemble particles;
  Matrix scores;
  RbfKernel kernel;
};

Problem make_problem(std::size_t n, std::size_t d) {
  RngStream rng(17);
  auto particles = ensemble_from_gaussian(n, d, 0.0, 1.5, rng);
  const auto target = GaussianMixture::isotropic(d, 0.5, 1.0);
  Matrix scores = evaluate_scores(target, particles, nullptr);
  const RbfKernel kernel(median_bandwidth(particles));
  return {std::move(particles), std::move(scores), kernel};
}

Execution exec_of(const benchmark::State& state) {
  return state.range(2) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(2) == 0 ? "serial" : "parallel");
  state.SetComplexityN(state.range(0));
}

void BM_SvgdDirection(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const Execution exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(svgd_direction(p.particles, p.scores, p.kernel, exec));
  label(state);
}

void BM_SteinKernelMatrix(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const Execution exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(stein_kernel_matrix(p.particles, p.scores, p.kernel, exec));
  label(state);
}

void BM_KsdUStatistic(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const Execution exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ksd_from_scores(p.particles, p.scores, p.kernel, KsdEstimator::u_statistic, exec));
  }
  label(state);
}

void BM_PairwiseDistances(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const Execution exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_distances(p.particles, exec));
  label(state);
}

void BM_MedianBandwidth(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const Execution exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(median_bandwidth(p.particles, exec));
  label(state);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (const long n : {100, 250, 1000}) {
    for (const long d : {1, 10}) {
      for (const long par : {0, 1}) b->Args({n, d, par});
    }
  }
  b->ArgNames({"n", "d", "par"})->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_SvgdDirection)->Apply(sizes);
BENCHMARK(BM_SteinKernelMatrix)->Apply(sizes);
BENCHMARK(BM_KsdUStatistic)->Apply(sizes);
BENCHMARK(BM_PairwiseDistances)->Apply(sizes);
BENCHMARK(BM_MedianBandwidth)->Apply(sizes);

BENCHMARK_MAIN();
