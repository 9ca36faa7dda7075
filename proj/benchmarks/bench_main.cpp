#include <benchmark/benchmark.h>

#include "spikecov/law.hpp"
#include "spikecov/model.hpp"
#include "spikecov/montecarlo.hpp"

namespace {

spikecov::SpikedModel two_atom_model(int n, long p) {
  auto dims = spikecov::make_dimensions(p, n);
  auto spectrum = spikecov::make_spectrum({{2.0, p / 2}, {1.0, p - p / 2}});
  spikecov::SpikeSet spikes;
  spikes.ds = {1.5 * std::sqrt(dims.phi)};
  return spikecov::build_model(dims, std::move(spectrum), std::move(spikes));
}

}  // namespace

static void BM_LawSolve(benchmark::State& state) {
  const auto model = two_atom_model(64, state.range(0));
  for (auto _ : state) {
    auto law = spikecov::EquivalentLaw::solve(model.spectrum, model.dims);
    benchmark::DoNotOptimize(law.gamma_plus());
  }
}
BENCHMARK(BM_LawSolve)->Arg(512)->Arg(4096)->Arg(32768);

static void BM_StieltjesGrid(benchmark::State& state) {
  const auto model = two_atom_model(64, 4096);
  const auto law = spikecov::EquivalentLaw::solve(model.spectrum, model.dims);
  const double lo = law.gamma_minus();
  const double span = law.gamma_plus() - lo;
  for (auto _ : state) {
    double acc = 0.0;
    for (int k = 1; k < 64; ++k)
      acc += law.density(lo + span * k / 64.0);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_StieltjesGrid);

static void BM_Quantiles(benchmark::State& state) {
  const auto model = two_atom_model(64, 4096);
  const auto law = spikecov::EquivalentLaw::solve(model.spectrum, model.dims);
  for (auto _ : state) {
    auto gammas = law.quantiles(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(gammas.data());
  }
}
BENCHMARK(BM_Quantiles)->Arg(64)->Arg(512);

static void BM_SampleMatrix(benchmark::State& state) {
  spikecov::TrialSpec spec;
  spec.model = two_atom_model(64, state.range(0));
  for (auto _ : state) {
    auto X = spikecov::sample_matrix(spec);
    benchmark::DoNotOptimize(X.data());
    spec.trial_index += 1;
  }
}
BENCHMARK(BM_SampleMatrix)->Arg(512)->Arg(4096);

// The companion path is the simulation hot loop: n x n Gram plus eigensolve.
static void BM_CompanionDecompose(benchmark::State& state) {
  spikecov::TrialSpec spec;
  spec.model = two_atom_model(static_cast<int>(state.range(0)), state.range(1));
  const auto X = spikecov::sample_matrix(spec);
  for (auto _ : state) {
    auto res = spikecov::spectral_decompose(spec.model, X, {{1, 1}});
    benchmark::DoNotOptimize(res.eigs.data());
  }
}
BENCHMARK(BM_CompanionDecompose)
    ->Args({64, 512})
    ->Args({128, 1448})
    ->Args({256, 4096});

BENCHMARK_MAIN();
