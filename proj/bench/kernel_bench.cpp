// Compares the plain serial primal evaluation against the chunked kernel
// at 1, 2, and 4 threads.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "nitm/model.hpp"
#include "nitm/rng.hpp"

namespace {

nitm::model::ObjectiveSpec make_spec(std::size_t m, std::size_t dim) {
  nitm::Rng rng(99);
  nitm::Matrix f(m, dim);
  std::vector<int> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < dim; ++j) f(i, j) = rng.uniform(-1.0, 1.0);
    labels[i] = i % 2 == 0 ? 1 : -1;
  }
  auto design = std::make_shared<nitm::model::DesignMatrix>(
      nitm::model::DesignMatrix::make(f, labels));
  return nitm::model::ObjectiveSpec::make(
      nitm::model::PriorSpec::make(10.0, static_cast<int>(dim)), 0.5, 1.0, design);
}

std::vector<double> make_point(std::size_t dim) {
  nitm::Rng rng(7);
  std::vector<double> mu(dim);
  for (double& v : mu) v = rng.uniform(-0.2, 0.2);
  return mu;
}

void BM_PrimalSerialReference(benchmark::State& state) {
  const auto spec = make_spec(static_cast<std::size_t>(state.range(0)), 16);
  const auto mu = make_point(16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nitm::model::detail::primal_objective_serial(spec, mu));
  }
}

void BM_PrimalChunked(benchmark::State& state) {
  const auto spec = make_spec(static_cast<std::size_t>(state.range(0)), 16);
  const auto mu = make_point(16);
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nitm::model::primal_objective(spec, mu, threads));
  }
}

}  // namespace

BENCHMARK(BM_PrimalSerialReference)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_PrimalChunked)
    ->Args({1 << 12, 1})
    ->Args({1 << 16, 1})
    ->Args({1 << 20, 1})
    ->Args({1 << 12, 2})
    ->Args({1 << 16, 2})
    ->Args({1 << 20, 2})
    ->Args({1 << 12, 4})
    ->Args({1 << 16, 4})
    ->Args({1 << 20, 4});

BENCHMARK_MAIN();
