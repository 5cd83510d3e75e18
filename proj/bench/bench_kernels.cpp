// Serial reference loops against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>

#include "gfield/analysis.hpp"
#include "gfield/decomp.hpp"
#include "gfield/sampler.hpp"

using namespace gfield;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_TensorCoefficients(benchmark::State& state) {
  const KernelSpec k = parse_kernel("exp-alpha:0.5", 2);
  for (auto _ : state) benchmark::DoNotOptimize(tensor_coefficients(k, 2, 3, 0.5, {4096, mode(state)}));
}

void BM_SamplePairings(benchmark::State& state) {
  const Decomposition d = biorthogonalize(tensor_coefficients(parse_kernel("exp-alpha:0.5", 1), 1, 6, 0.5), 0.0,
                                          NormMode::coefficient_euclidean);
  std::vector<CoefficientFunctional> fs;
  for (double x : {0.0, 0.25, 0.5}) fs.push_back(CoefficientFunctional::dirac({x}));
  const Eigen::MatrixXd table = pairing_table(d, fs);
  for (auto _ : state) benchmark::DoNotOptimize(sample_pairings(d.lambdas, table, 1, 20000, mode(state)));
}

void BM_HolderSeminorm(benchmark::State& state) {
  GridValues g;
  g.dim = 1;
  g.resolution = 12;
  g.values.resize(g.points_per_axis());
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = std::sin(40.0 * g.node(i)[0]) + std::sqrt(g.node(i)[0]);
  for (auto _ : state) benchmark::DoNotOptimize(holder_seminorm(g, 0.5, mode(state)));
}

void BM_BesovPartialSums(benchmark::State& state) {
  const KernelSpec k = parse_kernel("exp-alpha:0.5", 1);
  for (auto _ : state) benchmark::DoNotOptimize(besov_partial_sums(k, 1, 6, 0.4, false, mode(state)));
}

}  // namespace

BENCHMARK(BM_TensorCoefficients)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplePairings)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HolderSeminorm)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BesovPartialSums)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
