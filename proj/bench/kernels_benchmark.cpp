// Serial reference vs OpenMP kernels on the filter's hot loops.

#include <benchmark/benchmark.h>

#include <vector>

#include "rsco/estimators.hpp"
#include "rsco/kernels.hpp"
#include "rsco/rng.hpp"

namespace {

rsco::PointMatrix random_points(Eigen::Index n, Eigen::Index d) {
  rsco::CounterRng rng(42);
  rsco::PointMatrix p(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) p(i, j) = rng.normal();
  return p;
}

template <bool Parallel>
void BM_WeightedScatter(benchmark::State& state) {
  const auto n = state.range(0);
  const auto d = state.range(1);
  const auto points = random_points(n, d);
  const std::vector<double> h(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
  const rsco::Vector center = rsco::Vector::Zero(d);
  for (auto _ : state) {
    auto m = Parallel ? rsco::kernels::parallel::weighted_scatter(points, h, center)
                      : rsco::kernels::serial::weighted_scatter(points, h, center);
    benchmark::DoNotOptimize(m.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void BM_WeightedSum(benchmark::State& state) {
  const auto n = state.range(0);
  const auto d = state.range(1);
  const auto points = random_points(n, d);
  const std::vector<double> h(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
  const rsco::Vector center = rsco::Vector::Zero(d);
  for (auto _ : state) {
    auto v = Parallel ? rsco::kernels::parallel::weighted_sum(points, h, center)
                      : rsco::kernels::serial::weighted_sum(points, h, center);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void BM_ProjectedScores(benchmark::State& state) {
  const auto n = state.range(0);
  const auto d = state.range(1);
  const auto points = random_points(n, d);
  const rsco::Vector center = rsco::Vector::Zero(d);
  const rsco::Vector v = rsco::Vector::Ones(d).normalized();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto _ : state) {
    if (Parallel) {
      rsco::kernels::parallel::projected_scores(points, center, v, out);
    } else {
      rsco::kernels::serial::projected_scores(points, center, v, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_FilterMean(benchmark::State& state) {
  const auto points = random_points(state.range(0), state.range(1));
  rsco::FilterConfig config;
  config.epsilon = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(rsco::filter_mean(points, config).estimate.data());
}

void Shapes(benchmark::internal::Benchmark* b) {
  for (long n : {1000, 10000, 100000}) b->Args({n, 20});
}

}  // namespace

BENCHMARK(BM_WeightedScatter<false>)->Name("weighted_scatter/serial")->Apply(Shapes);
BENCHMARK(BM_WeightedScatter<true>)->Name("weighted_scatter/omp")->Apply(Shapes);
BENCHMARK(BM_WeightedSum<false>)->Name("weighted_sum/serial")->Apply(Shapes);
BENCHMARK(BM_WeightedSum<true>)->Name("weighted_sum/omp")->Apply(Shapes);
BENCHMARK(BM_ProjectedScores<false>)->Name("projected_scores/serial")->Apply(Shapes);
BENCHMARK(BM_ProjectedScores<true>)->Name("projected_scores/omp")->Apply(Shapes);
BENCHMARK(BM_FilterMean)->Args({5000, 20});

BENCHMARK_MAIN();
