#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>

#include "tsbm/divergence.hpp"
#include "tsbm/markov.hpp"
#include "tsbm/metrics.hpp"
#include "tsbm/recovery.hpp"
#include "tsbm/rng.hpp"
#include "tsbm/sbm.hpp"
#include "tsbm/spectral.hpp"

using namespace tsbm;

namespace {

MarkovParams fig4_params(double N) {
  const double rho = std::log(N) / N;
  return {chain_from_stationary(2.5 * rho, 0.7), chain_from_stationary(1.5 * rho, 0.3)};
}

void BM_MarkovRenyiExact(benchmark::State& state) {
  const BinaryMarkovChain f{0.2, 0.1, 0.7};
  const BinaryMarkovChain g{0.1, 0.05, 0.3};
  const auto T = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(markov_renyi_exact(0.5, f, g, T));
}
BENCHMARK(BM_MarkovRenyiExact)->Arg(10)->Arg(1000)->Arg(100000);

void BM_MarkovRenyiBrute(benchmark::State& state) {
  const BinaryMarkovChain f{0.2, 0.1, 0.7};
  const BinaryMarkovChain g{0.1, 0.05, 0.3};
  const auto T = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(markov_renyi_brute(0.5, f, g, T));
}
BENCHMARK(BM_MarkovRenyiBrute)->Arg(8)->Arg(12);

void BM_TStar(benchmark::State& state) {
  const auto p = fig4_params(500.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(t_star(p.intra, p.inter, 500, 2, ThresholdConvention::kExact));
  }
}
BENCHMARK(BM_TStar);

void BM_SampleMarkovSnapshots(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto p = fig4_params(static_cast<double>(N));
  const auto sigma = sample_labelling(N, 2, 1);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_markov_snapshots(sigma, p.intra, p.inter, 20, ++seed));
  }
}
BENCHMARK(BM_SampleMarkovSnapshots)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Alg2(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto p = fig4_params(static_cast<double>(N));
  const auto sigma = sample_labelling(N, 2, 1);
  const auto x = sample_markov_snapshots(sigma, p.intra, p.inter, 20, 2);
  const auto init = sample_labelling(N, 2, 3);
  OnlineOptions o;
  o.order = UpdateOrder::kAsynchronous;
  for (auto _ : state) benchmark::DoNotOptimize(alg2_run(x, init, p, o));
}
BENCHMARK(BM_Alg2)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Alg3(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto p = fig4_params(static_cast<double>(N));
  const auto sigma = sample_labelling(N, 2, 1);
  const auto x = sample_markov_snapshots(sigma, p.intra, p.inter, 20, 2);
  OnlineOptions o;
  o.order = UpdateOrder::kAsynchronous;
  for (auto _ : state) benchmark::DoNotOptimize(alg3_run(x, sigma, o));
}
BENCHMARK(BM_Alg3)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_SpectralAggregate(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto p = fig4_params(static_cast<double>(N));
  const auto sigma = sample_labelling(N, 2, 1);
  const auto x = sample_markov_snapshots(sigma, p.intra, p.inter, 20, 2);
  const auto adj = aggregate(x);
  SpectralConfig sc;
  sc.K = 2;
  for (auto _ : state) benchmark::DoNotOptimize(spectral_cluster(adj, sc));
}
BENCHMARK(BM_SpectralAggregate)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_HamStarAssignment(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto a = sample_labelling(10000, K, 1);
  const auto b = sample_labelling(10000, K, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ham_star_assignment(a, b));
}
BENCHMARK(BM_HamStarAssignment)->Arg(2)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
