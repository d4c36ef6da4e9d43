#include <benchmark/benchmark.h>

#include "ckn/fields.hpp"
#include "ckn/inequality.hpp"
#include "ckn/measure.hpp"
#include "ckn/moser.hpp"
#include "ckn/solver.hpp"

namespace {

void BM_OffCenterBallMeasure(benchmark::State& state) {
  const ckn::WeightParams w = ckn::validate(3, 0.3, 0.4);
  const ckn::BallSpec ball{{0.7, 0.2, 0.0}, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(ckn::ball_measure(w, ball).value);
}
BENCHMARK(BM_OffCenterBallMeasure);

void BM_BoxDiscretization(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const ckn::WeightParams w = ckn::validate(3, 0.3, 0.4);
  for (auto _ : state) {
    const auto disc = ckn::make_discretization(w, ckn::BoxGrid({-1, -1, -1}, {1, 1, 1}, {cells, cells, cells}));
    benchmark::DoNotOptimize(ckn::stiffness_matrix(*disc).val.data());
    benchmark::DoNotOptimize(disc->source_masses().data());
  }
}
BENCHMARK(BM_BoxDiscretization)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_RadialSolve(benchmark::State& state) {
  const ckn::WeightParams w = ckn::validate(3, 0.25, 0.25);
  const auto disc = ckn::make_discretization(w, ckn::RadialGrid::make(0.0, 1.0, static_cast<int>(state.range(0))));
  const auto sys = ckn::assemble(ckn::DiscreteField::constant(disc, 1.0), ckn::DiscreteField::constant(disc, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(ckn::solve(sys).report.iterations);
}
BENCHMARK(BM_RadialSolve)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_BoxSolve(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const ckn::WeightParams w = ckn::validate(3, 0.3, 0.4);
  const auto disc = ckn::make_discretization(w, ckn::BoxGrid({-1, -1, -1}, {1, 1, 1}, {cells, cells, cells}));
  const auto sys = ckn::assemble(ckn::DiscreteField::constant(disc, 1.0), ckn::DiscreteField::constant(disc, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(ckn::solve(sys).report.iterations);
}
BENCHMARK(BM_BoxSolve)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_CknSuite(benchmark::State& state) {
  const ckn::WeightParams w = ckn::validate(3, 0.3, 0.4);
  const auto disc = ckn::make_discretization(w, ckn::BoxGrid({-1, -1, -1}, {1, 1, 1}, {16, 16, 16}));
  for (auto _ : state) benchmark::DoNotOptimize(ckn::ckn_suite(disc, 11).max_ratio);
}
BENCHMARK(BM_CknSuite)->Unit(benchmark::kMillisecond);

void BM_LemmaA2Trials(benchmark::State& state) {
  ckn::Rng rng(3);
  const ckn::IterationEnvelope env = ckn::random_envelope(rng);
  const ckn::MeasureFamily fam{ckn::validate(3, 0.3, 0.4), 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(ckn::lemma_a2_property_check(env, fam, 1.0, 100, 1).max_ratio);
}
BENCHMARK(BM_LemmaA2Trials)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
