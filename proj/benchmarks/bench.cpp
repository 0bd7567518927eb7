#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hcd/ensemble.hpp"
#include "hcd/fcm.hpp"
#include "hcd/models.hpp"
#include "hcd/speckle.hpp"

namespace {

hcd::Raster speckle_field(int side, double looks) {
  hcd::Raster r;
  r.header = {side, side, 1, {hcd::BandRole::sar_intensity}};
  r.data.resize(static_cast<std::size_t>(side) * side);
  std::mt19937_64 eng(11);
  std::gamma_distribution<double> gamma(looks, 40.0 / looks);
  for (auto& v : r.data) v = static_cast<float>(gamma(eng));
  return r;
}

Eigen::MatrixXd blob_data(int n, int d, int k) {
  std::mt19937_64 eng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) X(i, c) = 8.0 * (i % k) + gauss(eng);
  return X;
}

void bm_hellinger_gamma(benchmark::State& state) {
  double acc = 0.0;
  for (auto _ : state)
    for (int i = 1; i <= 100; ++i)
      acc += hcd::hellinger_gamma(0.1 * i, 5.0 - 0.04 * i, 5.0);
  benchmark::DoNotOptimize(acc);
}

void bm_enhanced_lee(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const hcd::Raster field = speckle_field(side, 5.0);
  for (auto _ : state) {
    const hcd::Raster out = hcd::enhanced_lee(field, {7, 5.0, 1.0});
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}

void bm_estimate_enl(benchmark::State& state) {
  const hcd::Raster field = speckle_field(512, 5.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(hcd::estimate_enl(field, 64).looks);
}

void bm_fcm_run(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd X = blob_data(n, 3, 4);
  hcd::FcmParams p;
  p.k = 4;
  p.metric = hcd::Metric::adaptive_mahalanobis;
  for (auto _ : state) {
    const hcd::FcmResult res = hcd::fcm_run(X, p);
    benchmark::DoNotOptimize(res.labels.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_consensus(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  // Twenty noisy 4-cluster labelings around a planted partition.
  std::mt19937_64 eng(3);
  std::uniform_int_distribution<int> flip(0, 19);
  std::vector<std::vector<int>> runs(20, std::vector<int>(static_cast<std::size_t>(n)));
  for (auto& labels : runs)
    for (int i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = flip(eng) == 0 ? (i + 1) % 4 : i % 4;
  const hcd::CoAssociation co = hcd::accumulate(runs);
  for (auto _ : state) {
    const hcd::ConsensusPartition cp = hcd::consensus(co);
    benchmark::DoNotOptimize(cp.labels.data());
  }
}

void bm_run_ensemble(benchmark::State& state) {
  const Eigen::MatrixXd X = blob_data(static_cast<int>(state.range(0)), 2, 4);
  hcd::EnsembleParams ep;
  ep.runs = 20;
  ep.k_min = 4;
  ep.k_max = 7;
  hcd::FcmParams fp;
  fp.metric = hcd::Metric::adaptive_mahalanobis;
  for (auto _ : state) {
    const hcd::ConsensusPartition cp = hcd::run_ensemble(X, ep, fp);
    benchmark::DoNotOptimize(cp.labels.data());
  }
}

BENCHMARK(bm_hellinger_gamma);
BENCHMARK(bm_enhanced_lee)->Arg(256)->Arg(512);
BENCHMARK(bm_estimate_enl);
BENCHMARK(bm_fcm_run)->Arg(500)->Arg(2500);
BENCHMARK(bm_consensus)->Arg(500)->Arg(2500);
BENCHMARK(bm_run_ensemble)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
