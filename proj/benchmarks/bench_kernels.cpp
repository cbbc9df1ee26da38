#include <benchmark/benchmark.h>

#include "kltensor/em.hpp"
#include "kltensor/ingest.hpp"
#include "kltensor/klpc.hpp"
#include "kltensor/synth.hpp"

using namespace kltensor;

namespace {

// Planted rank-4 count tensor of the requested mode size, N = 4.
SparseTensor planted(std::size_t dim, std::uint64_t draws) {
  const std::vector<std::size_t> shape(4, dim);
  const CpdModel truth = init_model(shape, 4, 7);
  return sample_tensor(normalize(truth), draws, 11);
}

const SparseTensor& iris_tensor() {
  static const SparseTensor t =
      discretize(read_csv_file(std::string(KLTENSOR_DATA_DIR) + "/iris.csv", "class"),
                 iris_binspec(), false)
          .at("all");
  return t;
}

}  // namespace

static void BM_Mttkrp(benchmark::State& state) {
  const auto t = planted(static_cast<std::size_t>(state.range(0)), 200000);
  const CpdModel model = init_model(t.shape(), 8, 3);
  for (auto _ : state) {
    for (std::size_t n = 0; n < t.order(); ++n) {
      benchmark::DoNotOptimize(mttkrp(t, model.factors(), n));
    }
  }
  state.counters["nnz"] = static_cast<double>(t.nnz());
}
BENCHMARK(BM_Mttkrp)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_EmStep(benchmark::State& state) {
  const auto t = planted(64, 200000);
  CpdModel model = init_model(t.shape(), 8, 3);
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(em_step(t, model, threads));
  }
}
BENCHMARK(BM_EmStep)->Arg(1)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_KlPrincipalComponent(benchmark::State& state) {
  const auto t = planted(64, 200000);
  for (auto _ : state) benchmark::DoNotOptimize(kl_principal_component(t));
}
BENCHMARK(BM_KlPrincipalComponent)->Unit(benchmark::kMicrosecond);

static void BM_IrisFit(benchmark::State& state) {
  FitOptions opts;
  opts.rank = 3;
  opts.restarts = static_cast<std::size_t>(state.range(0));
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit(iris_tensor(), opts));
}
BENCHMARK(BM_IrisFit)->Arg(1)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_Sample(benchmark::State& state) {
  const CpdModel truth = init_model(std::vector<std::size_t>(3, 10), 3, 5);
  const NormalizedModel n = normalize(truth);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_tensor(n, 100000, 1, static_cast<unsigned>(state.range(0))));
  }
}
BENCHMARK(BM_Sample)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
